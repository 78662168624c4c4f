#pragma once

// Continuous-time models: an embedded chain with mean transition durations,
// average cost per unit time, and uniformization of the exponential case.

#include <cstddef>
#include <string>
#include <vector>

#include "itmdp/belief.hpp"
#include "itmdp/mdp_core.hpp"

namespace itmdp {

/// `embedded.cost` holds cost rates per unit time; `durations[u](i, j)` is the
/// mean time of an i -> j transition under u. Entries where the transition
/// probability is zero are ignored.
struct SemiMarkovModel {
    GenericMdp embedded;
    std::vector<Matrix> durations;
};

/// Embedded-model violations plus duration shape and positivity problems.
std::vector<std::string> validate(const SemiMarkovModel& model);
void require_valid(const SemiMarkovModel& model);

/// Mean holding time d_i(u) = sum_j p(j | i, u) d_ij(u), as an n-by-m matrix.
Matrix exit_means(const SemiMarkovModel& model);

/// Long-run cost per unit time under `policy` (renewal-reward ratio).
/// Throws MultichainError when the embedded chain is not unichain.
double evaluate_smdp_policy(const SemiMarkovModel& model, const StationaryPolicy& policy);

/// Fraction of time spent in each state: pi_i d_i normalized.
Vector time_stationary_distribution(const SemiMarkovModel& model, const StationaryPolicy& policy);

struct UniformizedModel {
    double d_bar = 0.0;
    std::vector<Matrix> transition_bar;
    Matrix exit_means;  // n-by-m, d_i(u)
};

/// Requires durations that depend only on (i, u) among positive-probability
/// entries, within 1e-12; throws InvalidInput otherwise.
UniformizedModel uniformize(const SemiMarkovModel& model);

inline constexpr double kSeriesTail = 1e-12;

/// F(u; tau) = sum_l Poisson(l; tau / d_bar) pbar(u)^l, truncated once the
/// included Poisson mass reaches 1 - tail and renormalized by that mass.
Matrix transition_over_time(const UniformizedModel& model, std::size_t action, double tau,
                            double tail = kSeriesTail);

/// Belief update with the transition matrix replaced by F(control; tau).
/// `obs_matrices` holds one observation matrix per action.
Belief timed_belief_update(const Belief& belief, std::size_t control, std::size_t observation,
                           double tau, const UniformizedModel& model,
                           const std::vector<Matrix>& obs_matrices);

}  // namespace itmdp
