#include "itmdp/belief.hpp"

#include <cmath>

#include <fmt/format.h>

#include "itmdp/errors.hpp"
#include "itmdp/parallel.hpp"
#include "itmdp/rng.hpp"

namespace itmdp {

std::vector<std::string> violations(const DetectorParams& d) {
    std::vector<std::string> out;
    auto unit = [&](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) out.push_back(fmt::format("{} = {} outside [0,1]", name, v));
    };
    unit(d.q_A_given_N, "q_A_given_N");
    unit(d.q_N_given_A, "q_N_given_A");
    unit(d.failure_fidelity, "failure_fidelity");
    if (d.q_A_given_N_defend) {
        unit(*d.q_A_given_N_defend, "q_A_given_N_defend");
        if (*d.q_A_given_N_defend > d.q_A_given_N)
            out.push_back("q_A_given_N_defend must not exceed q_A_given_N");
    }
    if (d.q_N_given_A_defend) {
        unit(*d.q_N_given_A_defend, "q_N_given_A_defend");
        if (*d.q_N_given_A_defend > d.q_N_given_A)
            out.push_back("q_N_given_A_defend must not exceed q_N_given_A");
    }
    return out;
}

namespace {

Matrix detector_matrix(double false_positive, double false_negative, double fidelity) {
    Matrix h(3, 3);
    h << 1.0 - false_positive, false_positive, 0.0,
         false_negative, 1.0 - false_negative, 0.0,
         0.0, 1.0 - fidelity, fidelity;
    return h;
}

}  // namespace

std::vector<Matrix> observation_matrices(const DetectorParams& d) {
    if (auto v = violations(d); !v.empty()) throw InvalidInput(std::move(v));
    const Matrix plain = detector_matrix(d.q_A_given_N, d.q_N_given_A, d.failure_fidelity);
    const Matrix defend = detector_matrix(d.q_A_given_N_defend.value_or(d.q_A_given_N),
                                          d.q_N_given_A_defend.value_or(d.q_N_given_A),
                                          d.failure_fidelity);
    return {plain, defend, plain};
}

Belief::Belief(Vector probs) : probs_(std::move(probs)) {
    bool ok = probs_.size() > 0;
    for (Eigen::Index i = 0; i < probs_.size() && ok; ++i) ok = probs_(i) >= 0.0 && probs_(i) <= 1.0;
    if (!ok || !(std::abs(probs_.sum() - 1.0) <= kStochasticTol))
        throw InvalidInput({"belief must be a probability vector summing to 1"});
}

namespace {

Belief normalized(Vector bbar) {
    for (Eigen::Index i = 0; i < bbar.size(); ++i)
        if (bbar(i) < kBeliefFloor) bbar(i) = 0.0;
    const double total = bbar.sum();
    if (!(total > 0.0))
        throw ImpossibleObservation("observation has zero likelihood under the current belief");
    return Belief(bbar / total);
}

void check_observation(const Matrix& obs_matrix, std::size_t observation, Eigen::Index n) {
    if (obs_matrix.rows() != n)
        throw InvalidInput({fmt::format("observation matrix has {} rows, belief has {} states",
                                        obs_matrix.rows(), n)});
    if (observation >= static_cast<std::size_t>(obs_matrix.cols()))
        throw InvalidInput({fmt::format("observation {} out of range ({} observations)", observation,
                                        obs_matrix.cols())});
}

}  // namespace

Belief initial_belief(const Vector& prior, std::size_t observation, const Matrix& obs_matrix) {
    Belief checked(prior);
    check_observation(obs_matrix, observation, prior.size());
    return normalized(obs_matrix.col(static_cast<Eigen::Index>(observation)).cwiseProduct(prior));
}

Belief update_with(const Belief& belief, const Matrix& transition, const Matrix& obs_matrix,
                   std::size_t observation) {
    const Eigen::Index n = belief.probs().size();
    if (transition.rows() != n || transition.cols() != n)
        throw InvalidInput({"transition matrix shape does not match the belief"});
    check_observation(obs_matrix, observation, n);
    const Vector predicted = transition.transpose() * belief.probs();
    return normalized(obs_matrix.col(static_cast<Eigen::Index>(observation)).cwiseProduct(predicted));
}

Belief update(const Belief& belief, std::size_t control, std::size_t observation,
              const GenericMdp& model) {
    if (!model.observation) throw InvalidInput({"model has no observation matrices"});
    if (control >= model.n_actions())
        throw InvalidInput({fmt::format("control {} out of range", control)});
    return update_with(belief, model.transition[control], (*model.observation)[control], observation);
}

std::size_t threshold_policy(const Belief& belief, const BeliefThresholds& t) {
    if (belief.size() != 3) throw InvalidInput({"threshold policy needs a three-state belief"});
    if (!(t.defend_on_attack_mass >= 0.0 && t.defend_on_attack_mass <= 1.0 &&
          t.reset_on_failure_mass >= 0.0 && t.reset_on_failure_mass <= 1.0))
        throw InvalidInput({"belief thresholds must lie in [0,1]"});
    if (belief[2] >= t.reset_on_failure_mass) return 2;
    if (belief[1] >= t.defend_on_attack_mass) return 1;
    return 0;
}

GenericMdp with_detector(GenericMdp model, const DetectorParams& detector) {
    if (model.n_states() != 3 || model.n_actions() != 3)
        throw InvalidInput({"detector observation model needs a three-state, three-action model"});
    model.observation = observation_matrices(detector);
    return model;
}

namespace {

std::size_t choose(const BeliefPolicy& policy, const Belief& b) {
    if (const auto* t = std::get_if<BeliefThresholds>(&policy)) return threshold_policy(b, *t);
    return std::get<std::function<std::size_t(const Belief&)>>(policy)(b);
}

Vector prior_of(const SimConfig& config, std::size_t n) {
    if (const auto* s = std::get_if<std::size_t>(&config.initial_state))
        return Vector::Unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(*s));
    const auto& d = std::get<std::vector<double>>(config.initial_state);
    return Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
}

// Runs one trajectory: start(x0, z0, b0), then visit(stage, x, u, next, z_next, belief_next).
template <typename Start, typename Visit>
void run_trajectory(const GenericMdp& model, const BeliefPolicy& policy, const SimConfig& config,
                    std::uint64_t stream, Start&& start, Visit&& visit) {
    const auto& obs = *model.observation;
    Stream rng(config.seed, stream);
    std::size_t x = detail::draw_initial(config, rng);
    const std::size_t z0 = detail::sample_row(obs[0].row(static_cast<Eigen::Index>(x)), rng.uniform());
    Belief b = initial_belief(prior_of(config, model.n_states()), z0, obs[0]);
    start(x, z0, b);
    for (std::uint64_t k = 0; k < config.stages; ++k) {
        const std::size_t u = choose(policy, b);
        if (u >= model.n_actions())
            throw InvalidInput({fmt::format("belief policy chose action {} out of range", u)});
        const auto xi = static_cast<Eigen::Index>(x);
        const std::size_t next = detail::sample_row(model.transition[u].row(xi), rng.uniform());
        const std::size_t z =
            detail::sample_row(obs[u].row(static_cast<Eigen::Index>(next)), rng.uniform());
        b = update(b, u, z, model);
        visit(k, x, u, next, z, b);
        x = next;
    }
}

}  // namespace

SimResult simulate_pomdp(const GenericMdp& base, const DetectorParams& detector,
                         const BeliefPolicy& policy, const SimConfig& config) {
    const GenericMdp model = with_detector(base, detector);
    require_valid(model);
    require_valid(config, model.n_states());
    const bool channels = model.maintenance.has_value();
    const std::size_t n = model.n_states();

    std::vector<detail::TrajectoryTotals> totals(config.trajectories);
    parallel_for(config.trajectories, [&](std::size_t t) {
        auto& out = totals[t];
        out.visits.assign(n, 0);
        run_trajectory(model, policy, config, t, [](std::size_t, std::size_t, const Belief&) {},
                       [&](std::uint64_t k, std::size_t x, std::size_t u, std::size_t next,
                           std::size_t, const Belief&) {
                           if (k < config.burn_in) return;
                           const auto xi = static_cast<Eigen::Index>(x);
                           const auto ni = static_cast<Eigen::Index>(next);
                           out.cost += model.cost[u](xi, ni);
                           if (channels) out.maintenance += (*model.maintenance)[u](xi, ni);
                           ++out.visits[x];
                       });
    });
    return detail::aggregate(totals, config.stages - config.burn_in, channels);
}

std::vector<BeliefTraceRow> trace_pomdp(const GenericMdp& base, const DetectorParams& detector,
                                        const BeliefPolicy& policy, const SimConfig& config) {
    const GenericMdp model = with_detector(base, detector);
    require_valid(model);
    require_valid(config, model.n_states());

    std::vector<BeliefTraceRow> rows;
    rows.reserve(config.stages + 1);
    run_trajectory(
        model, policy, config, 0,
        [&](std::size_t x, std::size_t z, const Belief& b) {
            BeliefTraceRow row;
            row.belief = b.probs();
            row.observation = z;
            row.hidden_state = x;
            rows.push_back(std::move(row));
        },
        [&](std::uint64_t k, std::size_t, std::size_t u, std::size_t next, std::size_t z,
            const Belief& b) {
            rows.back().action = u;
            BeliefTraceRow row;
            row.stage = k + 1;
            row.belief = b.probs();
            row.observation = z;
            row.hidden_state = next;
            row.action = choose(policy, b);
            rows.push_back(std::move(row));
        });
    return rows;
}

}  // namespace itmdp
