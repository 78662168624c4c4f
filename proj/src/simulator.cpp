#include "itmdp/simulator.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "itmdp/errors.hpp"
#include "itmdp/parallel.hpp"
#include "itmdp/rng.hpp"

namespace itmdp {

void require_valid(const SimConfig& config, std::size_t n_states) {
    std::vector<std::string> v;
    if (config.stages == 0) v.push_back("stages must be positive");
    if (config.trajectories == 0) v.push_back("trajectories must be positive");
    if (config.burn_in >= config.stages)
        v.push_back(fmt::format("burn_in ({}) must be below stages ({})", config.burn_in,
                                config.stages));
    if (const auto* s = std::get_if<std::size_t>(&config.initial_state)) {
        if (*s >= n_states)
            v.push_back(fmt::format("initial state {} out of range for {} states", *s, n_states));
    } else {
        const auto& dist = std::get<std::vector<double>>(config.initial_state);
        double sum = 0.0;
        bool ok = dist.size() == n_states;
        for (double p : dist) {
            ok = ok && p >= 0.0 && p <= 1.0;
            sum += p;
        }
        if (!ok || std::abs(sum - 1.0) > kStochasticTol)
            v.push_back("initial distribution must have one probability per state summing to 1");
    }
    if (!v.empty()) throw InvalidInput(std::move(v));
}

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_error_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

namespace detail {

std::size_t draw_initial(const SimConfig& config, Stream& rng) {
    if (const auto* s = std::get_if<std::size_t>(&config.initial_state)) return *s;
    const auto& dist = std::get<std::vector<double>>(config.initial_state);
    const Eigen::Map<const Vector> row(dist.data(), static_cast<Eigen::Index>(dist.size()));
    return sample_row(row, rng.uniform());
}

SimResult aggregate(const std::vector<TrajectoryTotals>& totals, std::uint64_t counted_stages,
                    bool channels) {
    const std::size_t n = totals.front().visits.size();
    const auto counted = static_cast<double>(counted_stages);
    std::vector<double> means, maint, fail;
    means.reserve(totals.size());
    std::vector<std::uint64_t> visits(n, 0);
    for (const auto& t : totals) {
        means.push_back(t.cost / counted);
        if (channels) {
            maint.push_back(t.maintenance / counted);
            fail.push_back((t.cost - t.maintenance) / counted);
        }
        for (std::size_t i = 0; i < n; ++i) visits[i] += t.visits[i];
    }

    SimResult r;
    r.mean_cost_per_stage = mean_of(means);
    r.std_error = std_error_of(means, r.mean_cost_per_stage);
    if (channels) {
        r.maintenance_mean = mean_of(maint);
        r.failure_mean = mean_of(fail);
    }
    const double total_visits = counted * static_cast<double>(totals.size());
    r.occupancy.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.occupancy[i] = static_cast<double>(visits[i]) / total_visits;
    return r;
}

}  // namespace detail

SimResult simulate(const GenericMdp& model, const StationaryPolicy& policy, const SimConfig& config) {
    require_valid(model);
    require_valid(config, model.n_states());
    require_valid(model, policy);
    const Matrix p = induced_transition(model, policy);
    const std::size_t n = model.n_states();
    const bool channels = model.maintenance.has_value();

    std::vector<detail::TrajectoryTotals> totals(config.trajectories);
    parallel_for(config.trajectories, [&](std::size_t t) {
        Stream rng(config.seed, t);
        detail::TrajectoryTotals& out = totals[t];
        out.visits.assign(n, 0);
        std::size_t x = detail::draw_initial(config, rng);
        for (std::uint64_t k = 0; k < config.stages; ++k) {
            const std::size_t u = policy.action_of_state[x];
            const auto xi = static_cast<Eigen::Index>(x);
            const std::size_t next = detail::sample_row(p.row(xi), rng.uniform());
            if (k >= config.burn_in) {
                const auto ni = static_cast<Eigen::Index>(next);
                out.cost += model.cost[u](xi, ni);
                if (channels) out.maintenance += (*model.maintenance)[u](xi, ni);
                ++out.visits[x];
            }
            x = next;
        }
    });

    return detail::aggregate(totals, config.stages - config.burn_in, channels);
}

FirstPassageStats first_passage(const GenericMdp& model, const StationaryPolicy& policy,
                                std::size_t source, std::size_t target, const SimConfig& config,
                                const PassageConfig& passage) {
    require_valid(model);
    const std::size_t n = model.n_states();
    if (source >= n || target >= n)
        throw InvalidInput({fmt::format("first passage states ({}, {}) out of range for {} states",
                                        source, target, n)});
    if (config.trajectories == 0 || passage.hits == 0 || passage.stage_cap == 0)
        throw InvalidInput({"first passage needs positive trajectories, hits and stage cap"});
    require_valid(model, policy);
    const Matrix p = induced_transition(model, policy);

    FirstPassageStats stats;
    stats.source = source;
    stats.target = target;

    if (source != target && !reachable_from(p, source)[target]) {
        stats.mean_stages = std::numeric_limits<double>::infinity();
        stats.std_error = std::numeric_limits<double>::quiet_NaN();
        stats.censored = config.trajectories;
        stats.note = fmt::format("state {} is unreachable from state {} under the policy", target,
                                 source);
        return stats;
    }

    struct Tally {
        double sum = 0.0;
        double sum_sq = 0.0;
        std::uint64_t count = 0;
        std::uint64_t censored = 0;
    };
    std::vector<Tally> tallies(config.trajectories);
    parallel_for(config.trajectories, [&](std::size_t t) {
        Stream rng(config.seed, t);
        const std::uint64_t want = passage.hits / config.trajectories +
                                   (t < passage.hits % config.trajectories ? 1 : 0);
        Tally& out = tallies[t];
        std::size_t x = source;
        std::uint64_t length = 1;
        std::uint64_t steps = 0;
        while (out.count < want) {
            if (steps == passage.stage_cap) {
                ++out.censored;
                break;
            }
            x = detail::sample_row(p.row(static_cast<Eigen::Index>(x)), rng.uniform());
            ++steps;
            ++length;
            if (x == target) {
                const auto len = static_cast<double>(length);
                out.sum += len;
                out.sum_sq += len * len;
                ++out.count;
                x = source;
                length = 1;
            }
        }
    });

    double sum = 0.0, sum_sq = 0.0;
    for (const auto& t : tallies) {
        sum += t.sum;
        sum_sq += t.sum_sq;
        stats.count += t.count;
        stats.censored += t.censored;
    }
    if (stats.count == 0) {
        stats.mean_stages = std::numeric_limits<double>::infinity();
        stats.std_error = std::numeric_limits<double>::quiet_NaN();
        stats.note = "no passage completed within the stage cap";
        return stats;
    }
    const auto c = static_cast<double>(stats.count);
    stats.mean_stages = sum / c;
    stats.std_error = stats.count > 1
                          ? std::sqrt(std::max(0.0, (sum_sq - c * stats.mean_stages * stats.mean_stages) /
                                                        (c - 1.0)) /
                                      c)
                          : std::numeric_limits<double>::quiet_NaN();
    if (stats.censored > 0)
        stats.note = fmt::format("{} passage(s) censored at the stage cap of {}", stats.censored,
                                 passage.stage_cap);
    return stats;
}

}  // namespace itmdp
