#pragma once

// Seeded Monte Carlo simulation of a GenericMdp under a fixed stationary
// policy. Trajectory i draws from Stream(seed, i), so results are identical
// for any thread count.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "itmdp/mdp_core.hpp"

namespace itmdp {

struct SimConfig {
    std::uint64_t stages = 100000;
    std::uint64_t trajectories = 1;
    std::uint64_t seed = 0;
    std::uint64_t burn_in = 0;
    // A fixed starting state, or a distribution to draw it from.
    std::variant<std::size_t, std::vector<double>> initial_state = std::size_t{0};
};

/// Throws InvalidInput when the configuration is unusable for `n_states`.
void require_valid(const SimConfig& config, std::size_t n_states);

struct FirstPassageStats {
    std::size_t source = 0;
    std::size_t target = 0;
    double mean_stages = 0.0;
    double std_error = 0.0;
    std::uint64_t count = 0;     // completed passages
    std::uint64_t censored = 0;  // passages cut off by the stage cap
    std::string note;
};

struct SimResult {
    double mean_cost_per_stage = 0.0;
    double std_error = 0.0;  // across trajectory means; NaN with one trajectory
    std::optional<double> maintenance_mean;
    std::optional<double> failure_mean;
    std::vector<double> occupancy;  // fraction of counted stages spent in each state
    std::optional<FirstPassageStats> first_passage;
};

SimResult simulate(const GenericMdp& model, const StationaryPolicy& policy, const SimConfig& config);

struct PassageConfig {
    std::uint64_t hits = 100000;            // passages to collect, split over trajectories
    std::uint64_t stage_cap = 10'000'000;   // per trajectory
};

/// Mean number of stages from a stage that starts in `source` through the
/// stage that starts in `target`, both counted. After every hit the walk
/// restarts at `source`. A passage still open when a trajectory reaches its
/// stage cap is censored. When `target` is unreachable from `source` under
/// the policy nothing is simulated and every trajectory reports one
/// censored passage.
FirstPassageStats first_passage(const GenericMdp& model, const StationaryPolicy& policy,
                                std::size_t source, std::size_t target, const SimConfig& config,
                                const PassageConfig& passage = {});

class Stream;

namespace detail {

struct TrajectoryTotals {
    double cost = 0.0;
    double maintenance = 0.0;
    std::vector<std::uint64_t> visits;
};

/// Combines per-trajectory totals, in index order, into a SimResult.
SimResult aggregate(const std::vector<TrajectoryTotals>& totals, std::uint64_t counted_stages,
                    bool channels);

/// Draws the starting state of a trajectory from the config.
std::size_t draw_initial(const SimConfig& config, itmdp::Stream& rng);

/// Index drawn from a probability row given u in [0, 1).
template <typename Row>
std::size_t sample_row(const Row& row, double u) {
    double acc = 0.0;
    std::size_t last = 0;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        const double p = row(j);
        if (p <= 0.0) continue;
        acc += p;
        last = static_cast<std::size_t>(j);
        if (u < acc) return last;
    }
    return last;  // rounding left u above the final partial sum
}

}  // namespace detail

}  // namespace itmdp
