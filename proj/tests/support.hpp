#pragma once

// Shared generators and independent reference computations for the tests.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "itmdp/it_model.hpp"
#include "itmdp/mdp_core.hpp"

namespace testing {

using itmdp::GenericMdp;
using itmdp::Matrix;
using itmdp::Vector;
using itmdp::it::ItParams;

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

/// Probabilities only; costs left at zero.
inline ItParams random_probabilities(std::mt19937_64& g) {
    ItParams p;
    p.p_A = uniform(g, 0.02, 0.98);
    p.p_F = uniform(g, 0.02, 0.98);
    p.p_D = uniform(g, 0.0, 0.98);
    p.p_R = uniform(g, 0.02, 1.0);
    return p;
}

/// Valid costs for the given probabilities: c_A < c_F, c_D < c_R <= c_F.
inline void random_costs(std::mt19937_64& g, ItParams& p) {
    p.c_F = uniform(g, 1.0, 10.0);
    p.c_R = p.c_F * uniform(g, 0.05, 1.0);
    p.c_D = p.c_R * uniform(g, 0.0, 0.99);
    p.c_A = p.c_F * uniform(g, 0.0, 0.99);
}

inline ItParams random_params(std::mt19937_64& g) {
    ItParams p = random_probabilities(g);
    random_costs(g, p);
    return p;
}

inline Matrix random_stochastic(std::mt19937_64& g, Eigen::Index rows, Eigen::Index cols,
                                double zero_chance = 0.0) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = uniform(g, 0.0, 1.0) < zero_chance ? 0.0 : uniform(g, 0.0, 1.0);
            s += m(i, j);
        }
        if (s == 0.0) {
            m(i, i % cols) = 1.0;
            s = 1.0;
        }
        m.row(i) /= s;
        // Push the rounding residue into the largest entry so rows sum to 1 tightly.
        Eigen::Index big = 0;
        m.row(i).maxCoeff(&big);
        m(i, big) += 1.0 - m.row(i).sum();
    }
    return m;
}

inline GenericMdp random_mdp(std::mt19937_64& g, std::size_t n, std::size_t m) {
    GenericMdp model;
    for (std::size_t i = 0; i < n; ++i) model.state_labels.push_back("s" + std::to_string(i));
    for (std::size_t u = 0; u < m; ++u) {
        model.action_labels.push_back("a" + std::to_string(u));
        model.transition.push_back(random_stochastic(g, static_cast<Eigen::Index>(n),
                                                     static_cast<Eigen::Index>(n)));
        Matrix c(n, n);
        for (Eigen::Index i = 0; i < c.rows(); ++i)
            for (Eigen::Index j = 0; j < c.cols(); ++j) c(i, j) = uniform(g, 0.0, 5.0);
        model.cost.push_back(c);
    }
    return model;
}

/// Average cost by long-run power iteration of the lazy chain (P + I)/2,
/// averaged from every state: an estimate independent of any linear solve.
inline double power_lambda(const Matrix& p, const Vector& gbar, int squarings = 60) {
    const auto n = p.rows();
    Matrix lazy = 0.5 * (p + Matrix::Identity(n, n));
    for (int k = 0; k < squarings; ++k) {
        lazy = lazy * lazy;
        lazy = lazy.array().colwise() / lazy.rowwise().sum().array();
    }
    const Vector limit = lazy * gbar;  // each entry is the gain seen from that start
    return limit.mean();
}

inline Vector power_stationary(const Matrix& p, int squarings = 60) {
    const auto n = p.rows();
    Matrix lazy = 0.5 * (p + Matrix::Identity(n, n));
    for (int k = 0; k < squarings; ++k) {
        lazy = lazy * lazy;
        lazy = lazy.array().colwise() / lazy.rowwise().sum().array();
    }
    return lazy.row(0).transpose();
}

/// Poisson-weighted series with a fixed number of terms and no renormalization.
inline Matrix fixed_series(const Matrix& pbar, double mean, int terms) {
    const auto n = pbar.rows();
    Matrix sum = Matrix::Zero(n, n);
    Matrix power = Matrix::Identity(n, n);
    double w = std::exp(-mean);
    for (int l = 0; l < terms; ++l) {
        sum += w * power;
        power = power * pbar;
        w *= mean / (l + 1);
    }
    return sum;
}

/// Posterior over the final hidden state given observations z_0..z_k and
/// controls u_0..u_{k-1}, by summing the joint probability of every hidden
/// path.
inline Vector enumerate_posterior(const Vector& prior, const std::vector<Matrix>& transition,
                                  const std::vector<Matrix>& observation, const Matrix& initial_obs,
                                  const std::vector<std::size_t>& controls,
                                  const std::vector<std::size_t>& observations) {
    const auto n = prior.size();
    Vector post = Vector::Zero(n);
    std::vector<Eigen::Index> path(controls.size() + 1, 0);
    const std::size_t len = path.size();
    std::function<void(std::size_t, double)> walk = [&](std::size_t t, double weight) {
        if (weight == 0.0) return;
        if (t == len) {
            post(path.back()) += weight;
            return;
        }
        for (Eigen::Index x = 0; x < n; ++x) {
            path[t] = x;
            double w;
            if (t == 0) {
                w = prior(x) * initial_obs(x, static_cast<Eigen::Index>(observations[0]));
            } else {
                const std::size_t u = controls[t - 1];
                w = weight * transition[u](path[t - 1], x) *
                    observation[u](x, static_cast<Eigen::Index>(observations[t]));
            }
            walk(t + 1, w);
        }
    };
    walk(0, 1.0);
    return post / post.sum();
}

}  // namespace testing
