#pragma once

// Finite-state, finite-action MDPs under the average-cost-per-stage
// criterion: model representation and validation, exact evaluation of
// stationary policies, relative value iteration, and exhaustive policy
// enumeration.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace itmdp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tolerances shared across the library.
inline constexpr double kStochasticTol = 1e-12;  // row sums of stochastic matrices
inline constexpr double kTieTol = 1e-12;         // equality of average costs
inline constexpr double kResidualTol = 1e-8;     // gain/bias system residual

/// n-state, m-action model stored as one n-by-n transition matrix and one
/// n-by-n cost matrix per action, plus optional per-action n-by-o
/// observation matrices. Entry (i, j) of transition[u] is the probability of
/// moving from i to j under u; cost[u](i, j) is the cost of that outcome.
///
/// maintenance[u](i, j), when present, is the portion of cost[u](i, j)
/// attributed to the maintenance channel (defend/reset overhead); the rest
/// of the entry belongs to the failure channel (attack/failure risk).
struct GenericMdp {
    std::vector<std::string> state_labels;
    std::vector<std::string> action_labels;
    std::vector<Matrix> transition;
    std::vector<Matrix> cost;
    std::optional<std::vector<Matrix>> observation;
    std::optional<std::vector<Matrix>> maintenance;

    std::size_t n_states() const { return state_labels.size(); }
    std::size_t n_actions() const { return action_labels.size(); }
    std::size_t n_observations() const;
};

struct Violation {
    enum class Kind {
        shape,
        probability_range,
        row_sum,
        cost_negative,
        cost_nonfinite,
        channel_range,
    };
    Kind kind;
    std::string matrix;  // "transition", "cost", "observation", "maintenance", "labels"
    std::size_t action = 0;
    std::size_t row = 0;
    double deviation = 0.0;
    std::string message;
};

/// Every invariant violation of the model; empty iff the model is valid.
std::vector<Violation> validate(const GenericMdp& model);

/// Throws InvalidInput listing every violation.
void require_valid(const GenericMdp& model);

/// A stationary policy: action_of_state[i] is the action taken in state i.
struct StationaryPolicy {
    std::vector<std::size_t> action_of_state;

    friend bool operator==(const StationaryPolicy&, const StationaryPolicy&) = default;
};

struct PolicyEvaluation {
    double lambda = 0.0;
    Vector bias;             // h with h(0) = 0
    Vector stationary_dist;  // pi, unichain case
    std::optional<double> lambda_maintenance;
    std::optional<double> lambda_failure;
};

/// Throws InvalidInput unless the policy has one valid action per state.
void require_valid(const GenericMdp& model, const StationaryPolicy& policy);

/// Transition matrix of the chain induced by a policy.
Matrix induced_transition(const GenericMdp& model, const StationaryPolicy& policy);

/// Expected one-stage cost per state under a policy.
Vector induced_cost(const GenericMdp& model, const StationaryPolicy& policy);

/// Recurrent classes of a stochastic matrix: the closed strongly connected
/// components of its support graph, each listed in ascending state order.
std::vector<std::vector<std::size_t>> recurrent_classes(const Matrix& transition);

/// Stationary distribution of a unichain stochastic matrix. Throws
/// MultichainError if the chain has more than one recurrent class.
Vector stationary_distribution(const Matrix& transition);

/// States reachable from `source` (including itself) in the support graph.
std::vector<bool> reachable_from(const Matrix& transition, std::size_t source);

/// Exact evaluation of a stationary policy by solving
///   lambda + h(i) = gbar(i) + sum_j p(j|i) h(j),  h(0) = 0.
/// Throws MultichainError when the induced chain is not unichain.
PolicyEvaluation evaluate_policy(const GenericMdp& model, const StationaryPolicy& policy);

struct RviOptions {
    double span_tol = 1e-10;
    std::size_t max_iterations = 100000;
    double greedy_tol = 1e-8;  // actions within this of the best Q-value are tied
};

struct RviResult {
    double lambda = 0.0;
    StationaryPolicy policy;                          // lowest-index greedy action
    std::vector<std::vector<std::size_t>> greedy_sets;  // all tied greedy actions per state
    Vector bias;
    std::size_t iterations = 0;
};

/// Relative value iteration on the aperiodicity-transformed model
/// (p -> (p + I) / 2, which keeps lambda and the optimal policies).
/// Throws NonConvergence when the span test fails within max_iterations.
RviResult relative_value_iteration(const GenericMdp& model, const RviOptions& options = {});

struct EnumeratedPolicy {
    StationaryPolicy policy;
    std::optional<PolicyEvaluation> evaluation;  // empty when multichain
    bool multichain = false;
    std::size_t tie_group = 0;  // entries sharing lambda within kTieTol share a group
};

inline constexpr std::size_t kMaxEnumeratedPolicies = 1'000'000;

/// Evaluates all m^n stationary policies. Unichain entries are sorted by
/// lambda ascending (policy index breaks exact ties); multichain entries
/// follow in policy-index order. Throws SizeLimitExceeded beyond
/// kMaxEnumeratedPolicies.
std::vector<EnumeratedPolicy> enumerate_policies(const GenericMdp& model);

/// Policy number `index` in the mixed-radix order used by enumerate_policies
/// (state 0 is the least significant digit).
StationaryPolicy policy_from_index(std::size_t index, std::size_t n_states, std::size_t n_actions);

}  // namespace itmdp
