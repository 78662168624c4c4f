#include "itmdp/semi_markov.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "itmdp/errors.hpp"

namespace itmdp {

std::vector<std::string> validate(const SemiMarkovModel& model) {
    std::vector<std::string> out;
    for (const auto& v : validate(model.embedded)) out.push_back(v.message);
    const std::size_t n = model.embedded.n_states();
    const std::size_t m = model.embedded.n_actions();
    if (model.durations.size() != m) {
        out.push_back(fmt::format("durations: expected {} matrices, got {}", m, model.durations.size()));
        return out;
    }
    for (std::size_t u = 0; u < m; ++u) {
        const Matrix& d = model.durations[u];
        if (d.rows() != static_cast<Eigen::Index>(n) || d.cols() != static_cast<Eigen::Index>(n)) {
            out.push_back(fmt::format("durations[{}]: expected {}x{}, got {}x{}", u, n, n, d.rows(),
                                      d.cols()));
            continue;
        }
        if (u >= model.embedded.transition.size()) continue;
        const Matrix& p = model.embedded.transition[u];
        if (p.rows() != d.rows() || p.cols() != d.cols()) continue;
        for (Eigen::Index i = 0; i < d.rows(); ++i)
            for (Eigen::Index j = 0; j < d.cols(); ++j)
                if (p(i, j) > 0.0 && !(std::isfinite(d(i, j)) && d(i, j) > 0.0))
                    out.push_back(fmt::format(
                        "durations[{}] row {} col {}: {} must be finite and positive", u, i, j,
                        d(i, j)));
    }
    return out;
}

void require_valid(const SemiMarkovModel& model) {
    if (auto v = validate(model); !v.empty()) throw InvalidInput(std::move(v));
}

namespace {

// Expected duration of leaving state i under u, ignoring zero-probability entries.
double exit_mean(const SemiMarkovModel& model, std::size_t u, Eigen::Index i) {
    const Matrix& p = model.embedded.transition[u];
    const Matrix& d = model.durations[u];
    double s = 0.0;
    for (Eigen::Index j = 0; j < p.cols(); ++j)
        if (p(i, j) > 0.0) s += p(i, j) * d(i, j);
    return s;
}

}  // namespace

Matrix exit_means(const SemiMarkovModel& model) {
    require_valid(model);
    const auto n = static_cast<Eigen::Index>(model.embedded.n_states());
    const auto m = static_cast<Eigen::Index>(model.embedded.n_actions());
    Matrix out(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index u = 0; u < m; ++u) out(i, u) = exit_mean(model, static_cast<std::size_t>(u), i);
    return out;
}

double evaluate_smdp_policy(const SemiMarkovModel& model, const StationaryPolicy& policy) {
    require_valid(model);
    require_valid(model.embedded, policy);
    const Vector pi = stationary_distribution(induced_transition(model.embedded, policy));
    double cost = 0.0;
    double time = 0.0;
    for (Eigen::Index i = 0; i < pi.size(); ++i) {
        if (pi(i) == 0.0) continue;
        const std::size_t u = policy.action_of_state[static_cast<std::size_t>(i)];
        const Matrix& p = model.embedded.transition[u];
        const Matrix& d = model.durations[u];
        const Matrix& g = model.embedded.cost[u];
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (p(i, j) <= 0.0) continue;
            cost += pi(i) * p(i, j) * d(i, j) * g(i, j);
            time += pi(i) * p(i, j) * d(i, j);
        }
    }
    return cost / time;
}

Vector time_stationary_distribution(const SemiMarkovModel& model, const StationaryPolicy& policy) {
    require_valid(model);
    require_valid(model.embedded, policy);
    Vector pi = stationary_distribution(induced_transition(model.embedded, policy));
    for (Eigen::Index i = 0; i < pi.size(); ++i)
        pi(i) *= exit_mean(model, policy.action_of_state[static_cast<std::size_t>(i)], i);
    return pi / pi.sum();
}

UniformizedModel uniformize(const SemiMarkovModel& model) {
    require_valid(model);
    const auto n = static_cast<Eigen::Index>(model.embedded.n_states());
    const std::size_t m = model.embedded.n_actions();

    std::vector<std::string> problems;
    for (std::size_t u = 0; u < m; ++u) {
        const Matrix& p = model.embedded.transition[u];
        const Matrix& d = model.durations[u];
        for (Eigen::Index i = 0; i < n; ++i) {
            double lo = INFINITY, hi = -INFINITY;
            for (Eigen::Index j = 0; j < n; ++j)
                if (p(i, j) > 0.0) {
                    lo = std::min(lo, d(i, j));
                    hi = std::max(hi, d(i, j));
                }
            if (hi - lo > 1e-12)
                problems.push_back(fmt::format(
                    "durations[{}] row {}: spread {} among reachable states; uniformization needs "
                    "durations that depend only on state and action",
                    u, i, hi - lo));
        }
    }
    if (!problems.empty()) throw InvalidInput(std::move(problems));

    UniformizedModel out;
    out.exit_means = exit_means(model);
    out.d_bar = out.exit_means.minCoeff();
    out.transition_bar.reserve(m);
    for (std::size_t u = 0; u < m; ++u) {
        const Matrix& p = model.embedded.transition[u];
        Matrix pbar(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ratio = out.d_bar / out.exit_means(i, static_cast<Eigen::Index>(u));
            for (Eigen::Index j = 0; j < n; ++j)
                pbar(i, j) = i == j ? ratio * p(i, i) + 1.0 - ratio : ratio * p(i, j);
        }
        out.transition_bar.push_back(std::move(pbar));
    }
    return out;
}

namespace {

inline constexpr double kDirectMeanLimit = 2000.0;

Matrix poisson_series(const Matrix& pbar, double mean, double tail) {
    const Eigen::Index n = pbar.rows();
    Matrix sum = Matrix::Zero(n, n);
    Matrix power = Matrix::Identity(n, n);
    const double log_mean = std::log(mean);
    // Far beyond the mean the remaining Poisson mass is negligible.
    const double last = mean + 40.0 * std::sqrt(mean) + 60.0;
    double mass = 0.0;
    for (std::size_t l = 0;; ++l) {
        const double dl = static_cast<double>(l);
        const double w = std::exp(-mean + dl * log_mean - std::lgamma(dl + 1.0));
        sum += w * power;
        mass += w;
        if (mass >= 1.0 - tail || dl > last) break;
        power = power * pbar;
    }
    return sum / mass;
}

}  // namespace

Matrix transition_over_time(const UniformizedModel& model, std::size_t action, double tau,
                            double tail) {
    if (action >= model.transition_bar.size())
        throw InvalidInput({fmt::format("action {} out of range", action)});
    if (!(tau >= 0.0) || !std::isfinite(tau))
        throw InvalidInput({fmt::format("elapsed time {} must be finite and nonnegative", tau)});
    if (!(tail > 0.0 && tail < 1.0)) throw InvalidInput({"series tail must lie in (0,1)"});
    const Matrix& pbar = model.transition_bar[action];
    if (tau == 0.0) return Matrix::Identity(pbar.rows(), pbar.cols());

    double mean = tau / model.d_bar;
    int squarings = 0;
    while (mean > kDirectMeanLimit) {
        mean /= 2.0;
        ++squarings;
    }
    Matrix f = poisson_series(pbar, mean, tail);
    for (int s = 0; s < squarings; ++s) f = f * f;
    return f;
}

Belief timed_belief_update(const Belief& belief, std::size_t control, std::size_t observation,
                           double tau, const UniformizedModel& model,
                           const std::vector<Matrix>& obs_matrices) {
    if (control >= obs_matrices.size())
        throw InvalidInput({fmt::format("no observation matrix for control {}", control)});
    return update_with(belief, transition_over_time(model, control, tau), obs_matrices[control],
                       observation);
}

}  // namespace itmdp
