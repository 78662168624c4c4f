#pragma once

// Belief-state filtering for the imperfect-detector model and simulation of
// belief-driven policies.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "itmdp/mdp_core.hpp"
#include "itmdp/simulator.hpp"

namespace itmdp {

/// Observation alphabet of the three-state model.
enum Observation : std::size_t { obs_N = 0, obs_A = 1, obs_F = 2 };

/// Detector error model. Primed rates apply to observations that follow a
/// defend action. A failure is reported as F-hat with probability
/// `failure_fidelity` and as A-hat otherwise.
struct DetectorParams {
    double q_A_given_N = 0.0;  // false positive
    double q_N_given_A = 0.0;  // false negative
    std::optional<double> q_A_given_N_defend;
    std::optional<double> q_N_given_A_defend;
    double failure_fidelity = 1.0;

    friend bool operator==(const DetectorParams&, const DetectorParams&) = default;
};

std::vector<std::string> violations(const DetectorParams& detector);

/// Per-action 3-by-3 observation matrices (rows: N, A, F; columns:
/// N-hat, A-hat, F-hat) for actions W, D, R.
std::vector<Matrix> observation_matrices(const DetectorParams& detector);

/// Probability vector over hidden states; entries in [0,1] summing to 1.
class Belief {
public:
    /// Throws InvalidInput unless `probs` is a distribution within kStochasticTol.
    explicit Belief(Vector probs);

    const Vector& probs() const { return probs_; }
    double operator[](std::size_t i) const { return probs_(static_cast<Eigen::Index>(i)); }
    std::size_t size() const { return static_cast<std::size_t>(probs_.size()); }

private:
    Vector probs_;
};

/// Entries below this are flushed to zero before normalizing.
inline constexpr double kBeliefFloor = 1e-300;

/// Normalizes q(z0 | i) P(x0 = i). Throws ImpossibleObservation when the
/// observation has zero likelihood under the prior.
Belief initial_belief(const Vector& prior, std::size_t observation, const Matrix& obs_matrix);

/// One step of the recursion with an explicit transition matrix:
///   bbar[i] = q(z | i) sum_j p(i | j) b[j],  then normalize.
Belief update_with(const Belief& belief, const Matrix& transition, const Matrix& obs_matrix,
                   std::size_t observation);

/// update_with using the model's transition and observation matrices for `control`.
Belief update(const Belief& belief, std::size_t control, std::size_t observation,
              const GenericMdp& model);

struct BeliefThresholds {
    double defend_on_attack_mass = 0.5;
    double reset_on_failure_mass = 0.5;
};

/// Reset if b[F] reaches its threshold, else defend if b[A] reaches its
/// threshold, else wait. Three-state model only.
std::size_t threshold_policy(const Belief& belief, const BeliefThresholds& thresholds);

using BeliefPolicy = std::variant<BeliefThresholds, std::function<std::size_t(const Belief&)>>;

/// Model with the detector's observation matrices attached.
GenericMdp with_detector(GenericMdp model, const DetectorParams& detector);

/// Simulates the hidden chain with actions chosen from the belief alone.
/// Stage k: act on b_k, draw x_{k+1} and z_{k+1} ~ H(u_k)[x_{k+1}], update.
/// The first observation is drawn from the wait-action matrix (action 0)
/// and the prior is the distribution of the initial state.
SimResult simulate_pomdp(const GenericMdp& model, const DetectorParams& detector,
                         const BeliefPolicy& policy, const SimConfig& config);

struct BeliefTraceRow {
    std::uint64_t stage = 0;
    Vector belief;
    std::size_t action = 0;
    std::size_t observation = 0;  // observation that produced `belief`
    std::size_t hidden_state = 0;
};

/// Single-trajectory trace (stream 0 of config.seed) for config.stages stages.
std::vector<BeliefTraceRow> trace_pomdp(const GenericMdp& model, const DetectorParams& detector,
                                        const BeliefPolicy& policy, const SimConfig& config);

}  // namespace itmdp
