#include "itmdp/mdp_core.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "itmdp/errors.hpp"
#include "itmdp/parallel.hpp"

namespace itmdp {

std::size_t GenericMdp::n_observations() const {
    if (!observation || observation->empty()) return 0;
    return static_cast<std::size_t>(observation->front().cols());
}

namespace {

void check_stochastic(const std::vector<Matrix>& mats, const std::string& name, std::size_t n,
                      std::optional<std::size_t> cols, std::vector<Violation>& out) {
    for (std::size_t u = 0; u < mats.size(); ++u) {
        const Matrix& p = mats[u];
        const auto want_cols = static_cast<Eigen::Index>(cols.value_or(n));
        if (p.rows() != static_cast<Eigen::Index>(n) || p.cols() != want_cols || want_cols == 0) {
            out.push_back({Violation::Kind::shape, name, u, 0, 0.0,
                           fmt::format("{}[{}] has shape {}x{}, expected {}x{}", name, u, p.rows(),
                                       p.cols(), n, want_cols)});
            continue;
        }
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            for (Eigen::Index j = 0; j < p.cols(); ++j) {
                const double v = p(i, j);
                if (!(v >= 0.0 && v <= 1.0)) {
                    const double dev = std::isfinite(v) ? (v < 0.0 ? -v : v - 1.0)
                                                        : std::numeric_limits<double>::infinity();
                    out.push_back({Violation::Kind::probability_range, name, u,
                                   static_cast<std::size_t>(i), dev,
                                   fmt::format("{}[{}] row {} column {}: probability {} outside [0,1]",
                                               name, u, i, j, v)});
                }
            }
            const double dev = std::abs(p.row(i).sum() - 1.0);
            if (!(dev <= kStochasticTol)) {
                out.push_back({Violation::Kind::row_sum, name, u, static_cast<std::size_t>(i), dev,
                               fmt::format("{}[{}] row {} sums to {:.17g} (deviation {:.3g})", name,
                                           u, i, p.row(i).sum(), dev)});
            }
        }
    }
}

}  // namespace

std::vector<Violation> validate(const GenericMdp& model) {
    std::vector<Violation> out;
    const std::size_t n = model.n_states();
    const std::size_t m = model.n_actions();
    if (n == 0 || m == 0) {
        out.push_back({Violation::Kind::shape, "labels", 0, 0, 0.0,
                       "model needs at least one state and one action"});
        return out;
    }
    auto check_count = [&](std::size_t count, const char* name) {
        if (count != m) {
            out.push_back({Violation::Kind::shape, name, 0, 0, 0.0,
                           fmt::format("{} holds {} matrices, expected one per action ({})", name,
                                       count, m)});
            return false;
        }
        return true;
    };

    if (check_count(model.transition.size(), "transition"))
        check_stochastic(model.transition, "transition", n, std::nullopt, out);

    if (check_count(model.cost.size(), "cost")) {
        for (std::size_t u = 0; u < m; ++u) {
            const Matrix& g = model.cost[u];
            if (g.rows() != static_cast<Eigen::Index>(n) || g.cols() != static_cast<Eigen::Index>(n)) {
                out.push_back({Violation::Kind::shape, "cost", u, 0, 0.0,
                               fmt::format("cost[{}] has shape {}x{}, expected {}x{}", u, g.rows(),
                                           g.cols(), n, n)});
                continue;
            }
            for (Eigen::Index i = 0; i < g.rows(); ++i)
                for (Eigen::Index j = 0; j < g.cols(); ++j) {
                    const double v = g(i, j);
                    if (!std::isfinite(v))
                        out.push_back({Violation::Kind::cost_nonfinite, "cost", u,
                                       static_cast<std::size_t>(i),
                                       std::numeric_limits<double>::infinity(),
                                       fmt::format("cost[{}] row {} column {} is not finite", u, i, j)});
                    else if (v < 0.0)
                        out.push_back({Violation::Kind::cost_negative, "cost", u,
                                       static_cast<std::size_t>(i), -v,
                                       fmt::format("cost[{}] row {} column {} is negative ({})", u,
                                                   i, j, v)});
                }
        }
    }

    if (model.observation) {
        const auto& obs = *model.observation;
        if (check_count(obs.size(), "observation")) {
            const auto o = static_cast<std::size_t>(obs.front().cols());
            check_stochastic(obs, "observation", n, o, out);
        }
    }

    if (model.maintenance && check_count(model.maintenance->size(), "maintenance") &&
        model.cost.size() == m) {
        for (std::size_t u = 0; u < m; ++u) {
            const Matrix& c = (*model.maintenance)[u];
            const Matrix& g = model.cost[u];
            if (c.rows() != g.rows() || c.cols() != g.cols()) {
                out.push_back({Violation::Kind::shape, "maintenance", u, 0, 0.0,
                               fmt::format("maintenance[{}] shape differs from cost[{}]", u, u)});
                continue;
            }
            for (Eigen::Index i = 0; i < c.rows(); ++i)
                for (Eigen::Index j = 0; j < c.cols(); ++j) {
                    const double v = c(i, j);
                    if (!(v >= 0.0 && v <= g(i, j)))
                        out.push_back({Violation::Kind::channel_range, "maintenance", u,
                                       static_cast<std::size_t>(i),
                                       std::isfinite(v) ? std::max(-v, v - g(i, j))
                                                        : std::numeric_limits<double>::infinity(),
                                       fmt::format("maintenance[{}] row {} column {} = {} outside "
                                                   "[0, cost = {}]",
                                                   u, i, j, v, g(i, j))});
                }
        }
    }
    return out;
}

void require_valid(const GenericMdp& model) {
    auto report = validate(model);
    if (report.empty()) return;
    std::vector<std::string> messages;
    messages.reserve(report.size());
    for (auto& v : report) messages.push_back(std::move(v.message));
    throw InvalidInput(std::move(messages));
}

void require_valid(const GenericMdp& model, const StationaryPolicy& policy) {
    if (policy.action_of_state.size() != model.n_states())
        throw InvalidInput({fmt::format("policy has {} entries, model has {} states",
                                        policy.action_of_state.size(), model.n_states())});
    for (std::size_t i = 0; i < policy.action_of_state.size(); ++i)
        if (policy.action_of_state[i] >= model.n_actions())
            throw InvalidInput({fmt::format("policy maps state {} to action {}, model has {} actions",
                                            i, policy.action_of_state[i], model.n_actions())});
}

namespace {

std::vector<std::vector<bool>> reachability(const Matrix& p) {
    const auto n = static_cast<std::size_t>(p.rows());
    std::vector<std::vector<bool>> reach(n);
    for (std::size_t s = 0; s < n; ++s) reach[s] = reachable_from(p, s);
    return reach;
}

PolicyEvaluation evaluate_checked(const GenericMdp& model, const StationaryPolicy& policy) {
    const Eigen::Index n = static_cast<Eigen::Index>(model.n_states());
    const Matrix p = induced_transition(model, policy);
    const Vector gbar = induced_cost(model, policy);

    PolicyEvaluation out;
    out.stationary_dist = stationary_distribution(p);  // throws on multichain

    // Unknowns: lambda, h(1), ..., h(n-1); h(0) = 0.
    Matrix a = Matrix::Identity(n, n) - p;
    a.col(0).setOnes();
    const Vector x = a.fullPivLu().solve(gbar);
    const double residual = (a * x - gbar).lpNorm<Eigen::Infinity>();
    if (!(residual <= kResidualTol * std::max(1.0, gbar.lpNorm<Eigen::Infinity>())))
        throw MultichainError(
            fmt::format("gain/bias system is singular (residual {:.3g}); chain is not unichain",
                        residual));
    out.lambda = x(0);
    out.bias = x;
    out.bias(0) = 0.0;

    if (model.maintenance) {
        Vector mbar(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::size_t u = policy.action_of_state[static_cast<std::size_t>(i)];
            mbar(i) = p.row(i).dot((*model.maintenance)[u].row(i));
        }
        out.lambda_maintenance = out.stationary_dist.dot(mbar);
        out.lambda_failure = out.stationary_dist.dot(gbar - mbar);
    }
    return out;
}

}  // namespace

Matrix induced_transition(const GenericMdp& model, const StationaryPolicy& policy) {
    const auto n = static_cast<Eigen::Index>(model.n_states());
    Matrix p(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        p.row(i) = model.transition[policy.action_of_state[static_cast<std::size_t>(i)]].row(i);
    return p;
}

Vector induced_cost(const GenericMdp& model, const StationaryPolicy& policy) {
    const auto n = static_cast<Eigen::Index>(model.n_states());
    Vector g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t u = policy.action_of_state[static_cast<std::size_t>(i)];
        g(i) = model.transition[u].row(i).dot(model.cost[u].row(i));
    }
    return g;
}

std::vector<bool> reachable_from(const Matrix& transition, std::size_t source) {
    const auto n = static_cast<std::size_t>(transition.rows());
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> queue{source};
    seen[source] = true;
    while (!queue.empty()) {
        const std::size_t i = queue.front();
        queue.pop_front();
        for (std::size_t j = 0; j < n; ++j)
            if (!seen[j] && transition(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) {
                seen[j] = true;
                queue.push_back(j);
            }
    }
    return seen;
}

std::vector<std::vector<std::size_t>> recurrent_classes(const Matrix& transition) {
    const auto n = static_cast<std::size_t>(transition.rows());
    const auto reach = reachability(transition);
    // A state is recurrent iff every state it reaches can reach it back.
    std::vector<bool> assigned(n, false);
    std::vector<std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < n; ++i) {
        if (assigned[i]) continue;
        bool recurrent = true;
        for (std::size_t j = 0; j < n && recurrent; ++j)
            if (reach[i][j] && !reach[j][i]) recurrent = false;
        if (!recurrent) continue;
        std::vector<std::size_t> cls;
        for (std::size_t j = 0; j < n; ++j)
            if (reach[i][j]) {
                cls.push_back(j);
                assigned[j] = true;
            }
        classes.push_back(std::move(cls));
    }
    return classes;
}

Vector stationary_distribution(const Matrix& transition) {
    const auto classes = recurrent_classes(transition);
    if (classes.size() != 1)
        throw MultichainError(fmt::format("chain has {} recurrent classes", classes.size()));
    const auto& cls = classes.front();
    const auto k = static_cast<Eigen::Index>(cls.size());

    // pi restricted to the recurrent class solves pi (P_cc - I) = 0, sum pi = 1.
    Matrix a(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
        for (Eigen::Index c = 0; c < k; ++c)
            a(r, c) = transition(static_cast<Eigen::Index>(cls[static_cast<std::size_t>(c)]),
                                 static_cast<Eigen::Index>(cls[static_cast<std::size_t>(r)])) -
                      (r == c ? 1.0 : 0.0);
    a.row(k - 1).setOnes();
    Vector rhs = Vector::Zero(k);
    rhs(k - 1) = 1.0;
    const Vector sub = a.fullPivLu().solve(rhs);

    Vector pi = Vector::Zero(transition.rows());
    for (Eigen::Index r = 0; r < k; ++r)
        pi(static_cast<Eigen::Index>(cls[static_cast<std::size_t>(r)])) = std::max(0.0, sub(r));
    pi /= pi.sum();
    return pi;
}

PolicyEvaluation evaluate_policy(const GenericMdp& model, const StationaryPolicy& policy) {
    require_valid(model);
    require_valid(model, policy);
    return evaluate_checked(model, policy);
}

RviResult relative_value_iteration(const GenericMdp& model, const RviOptions& options) {
    require_valid(model);
    const auto n = static_cast<Eigen::Index>(model.n_states());
    const std::size_t m = model.n_actions();

    std::vector<Vector> gbar(m);
    std::vector<Matrix> lazy(m);  // (P + I) / 2
    for (std::size_t u = 0; u < m; ++u) {
        gbar[u] = (model.transition[u].array() * model.cost[u].array()).rowwise().sum();
        lazy[u] = 0.5 * (model.transition[u] + Matrix::Identity(n, n));
    }

    Vector h = Vector::Zero(n);
    Vector th(n);
    double span = std::numeric_limits<double>::infinity();
    RviResult out;
    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        th = gbar[0] + lazy[0] * h;
        for (std::size_t u = 1; u < m; ++u) th = th.cwiseMin(gbar[u] + lazy[u] * h);
        const Vector diff = th - h;
        const double lo = diff.minCoeff();
        const double hi = diff.maxCoeff();
        span = hi - lo;
        h = th.array() - th(0);
        if (span < options.span_tol) {
            out.lambda = 0.5 * (lo + hi);
            out.iterations = it;
            break;
        }
    }
    if (out.iterations == 0)
        throw NonConvergence(fmt::format("relative value iteration did not converge in {} "
                                         "iterations (last span {:.3g})",
                                         options.max_iterations, span),
                             span);

    // Undo the aperiodicity transform: bias of the original model is h / 2.
    out.bias = 0.5 * h;
    out.policy.action_of_state.resize(static_cast<std::size_t>(n));
    out.greedy_sets.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<double> q(m);
        for (std::size_t u = 0; u < m; ++u)
            q[u] = gbar[u](i) + model.transition[u].row(i).dot(out.bias);
        const double best = *std::min_element(q.begin(), q.end());
        auto& set = out.greedy_sets[static_cast<std::size_t>(i)];
        for (std::size_t u = 0; u < m; ++u)
            if (q[u] <= best + options.greedy_tol) set.push_back(u);
        out.policy.action_of_state[static_cast<std::size_t>(i)] = set.front();
    }
    return out;
}

StationaryPolicy policy_from_index(std::size_t index, std::size_t n_states, std::size_t n_actions) {
    StationaryPolicy p;
    p.action_of_state.resize(n_states);
    for (std::size_t i = 0; i < n_states; ++i) {
        p.action_of_state[i] = index % n_actions;
        index /= n_actions;
    }
    return p;
}

std::vector<EnumeratedPolicy> enumerate_policies(const GenericMdp& model) {
    require_valid(model);
    const std::size_t n = model.n_states();
    const std::size_t m = model.n_actions();
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (total > kMaxEnumeratedPolicies / m)
            throw SizeLimitExceeded(fmt::format("{}^{} policies exceed the enumeration limit of {}",
                                                m, n, kMaxEnumeratedPolicies));
        total *= m;
    }

    std::vector<EnumeratedPolicy> entries(total);
    parallel_for(total, [&](std::size_t idx) {
        auto& e = entries[idx];
        e.policy = policy_from_index(idx, n, m);
        try {
            e.evaluation = evaluate_checked(model, e.policy);
        } catch (const MultichainError&) {
            e.multichain = true;
        }
    });

    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ea = entries[a];
        const auto& eb = entries[b];
        if (ea.multichain != eb.multichain) return !ea.multichain;
        if (ea.multichain) return false;
        return ea.evaluation->lambda < eb.evaluation->lambda;
    });

    std::vector<EnumeratedPolicy> sorted;
    sorted.reserve(total);
    std::size_t group = 0;
    double group_start = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        EnumeratedPolicy e = std::move(entries[order[k]]);
        if (k > 0) {
            if (e.multichain || sorted.back().multichain || e.evaluation->lambda - group_start > kTieTol)
                ++group;
        }
        if (!e.multichain && (k == 0 || sorted.back().tie_group != group))
            group_start = e.evaluation->lambda;
        e.tie_group = group;
        sorted.push_back(std::move(e));
    }
    return sorted;
}

}  // namespace itmdp
