#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "itmdp/belief.hpp"
#include "itmdp/errors.hpp"
#include "itmdp/rng.hpp"
#include "itmdp/semi_markov.hpp"
#include "support.hpp"

using namespace itmdp;

namespace {

SemiMarkovModel flip_model() {
    SemiMarkovModel s;
    s.embedded.state_labels = {"a", "b"};
    s.embedded.action_labels = {"go"};
    Matrix p(2, 2);
    p << 0, 1, 1, 0;
    s.embedded.transition = {p};
    s.embedded.cost = {Matrix::Ones(2, 2)};
    Matrix d(2, 2);
    d << 1, 1, 2, 2;
    s.durations = {d};
    return s;
}

SemiMarkovModel with_unit_durations(const GenericMdp& m) {
    SemiMarkovModel s{m, {}};
    for (std::size_t u = 0; u < m.n_actions(); ++u)
        s.durations.push_back(Matrix::Ones(static_cast<Eigen::Index>(m.n_states()), static_cast<Eigen::Index>(m.n_states())));
    return s;
}

// Exponential holding times depending on (i, u) only.
SemiMarkovModel random_exponential(std::mt19937_64& g, std::size_t n, std::size_t m) {
    SemiMarkovModel s{testing::random_mdp(g, n, m), {}};
    for (std::size_t u = 0; u < m; ++u) {
        Matrix d(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < d.rows(); ++i) d.row(i).setConstant(testing::uniform(g, 0.2, 3.0));
        s.durations.push_back(d);
    }
    return s;
}

}  // namespace

TEST_CASE("unit durations reduce to the discrete average cost") {
    std::mt19937_64 g(1);
    for (int k = 0; k < 20; ++k) {
        const GenericMdp m = testing::random_mdp(g, 3, 2);
        const StationaryPolicy p{{1, 0, 1}};
        CHECK(evaluate_smdp_policy(with_unit_durations(m), p) ==
              doctest::Approx(evaluate_policy(m, p).lambda).epsilon(1e-10));
    }
}

TEST_CASE("one-state model accrues its rate") {
    SemiMarkovModel s;
    s.embedded.state_labels = {"s"};
    s.embedded.action_labels = {"a"};
    s.embedded.transition = {Matrix::Ones(1, 1)};
    s.embedded.cost = {Matrix::Constant(1, 1, 3.0)};
    s.durations = {Matrix::Constant(1, 1, 2.0)};
    CHECK(evaluate_smdp_policy(s, StationaryPolicy{{0}}) == doctest::Approx(3.0));
}

TEST_CASE("renewal-reward ratio matches continuous-time simulation") {
    std::mt19937_64 g(2);
    const SemiMarkovModel s = random_exponential(g, 3, 2);
    const StationaryPolicy policy{{0, 1, 1}};
    const double exact = evaluate_smdp_policy(s, policy);
    const Matrix p = induced_transition(s.embedded, policy);

    // Cost accrues at rate g(i,u,j) over an exponential holding time.
    const int reps = 32;
    std::vector<double> rates;
    for (int r = 0; r < reps; ++r) {
        Stream rng(99, static_cast<std::uint64_t>(r));
        std::size_t x = 0;
        double cost = 0.0, time = 0.0;
        for (int k = 0; k < 20000; ++k) {
            const std::size_t u = policy.action_of_state[x];
            const std::size_t next = detail::sample_row(p.row(static_cast<Eigen::Index>(x)), rng.uniform());
            const double dt = rng.exponential(s.durations[u](static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(next)));
            cost += dt * s.embedded.cost[u](static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(next));
            time += dt;
            x = next;
        }
        rates.push_back(cost / time);
    }
    double mean = 0.0;
    for (double v : rates) mean += v;
    mean /= reps;
    double ss = 0.0;
    for (double v : rates) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / (reps - 1) / reps);
    CHECK(std::abs(mean - exact) <= 3.0 * se);
}

TEST_CASE("validation of durations") {
    SemiMarkovModel s = flip_model();
    s.durations[0](0, 1) = 0.0;
    CHECK_FALSE(validate(s).empty());
    s = flip_model();
    s.durations[0](0, 0) = -5.0;  // zero-probability entry is ignored
    CHECK(validate(s).empty());
    s.durations.clear();
    CHECK_THROWS_AS(require_valid(s), InvalidInput);
}

TEST_CASE("uniformize the two-state flip") {
    const UniformizedModel u = uniformize(flip_model());
    CHECK(u.d_bar == 1.0);
    CHECK(u.transition_bar[0](0, 0) == 0.0);
    CHECK(u.transition_bar[0](0, 1) == 1.0);
    CHECK(u.transition_bar[0](1, 0) == doctest::Approx(0.5));
    CHECK(u.transition_bar[0](1, 1) == doctest::Approx(0.5));
}

TEST_CASE("equal holding times leave the chain unchanged") {
    std::mt19937_64 g(3);
    SemiMarkovModel s{testing::random_mdp(g, 4, 2), {}};
    for (int u = 0; u < 2; ++u) s.durations.push_back(Matrix::Constant(4, 4, 1.7));
    const UniformizedModel u = uniformize(s);
    for (int a = 0; a < 2; ++a)
        CHECK((u.transition_bar[a] - s.embedded.transition[a]).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("uniformize rejects durations that depend on the destination") {
    SemiMarkovModel s = flip_model();
    s.embedded.transition[0] << 0.5, 0.5, 1, 0;
    s.durations[0] << 1, 2, 2, 2;
    CHECK_THROWS_AS(uniformize(s), InvalidInput);
}

TEST_CASE("transition over zero time is the identity") {
    const UniformizedModel u = uniformize(flip_model());
    CHECK(transition_over_time(u, 0, 0.0) == Matrix::Identity(2, 2));
    CHECK_THROWS_AS(transition_over_time(u, 0, -1.0), InvalidInput);
    CHECK_THROWS_AS(transition_over_time(u, 3, 1.0), InvalidInput);
}

TEST_CASE("series matches a 200-term reference") {
    const UniformizedModel u = uniformize(flip_model());
    const Matrix ref = testing::fixed_series(u.transition_bar[0], 1.0, 200);
    CHECK((transition_over_time(u, 0, u.d_bar) - ref).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("semigroup property") {
    std::mt19937_64 g(4);
    const UniformizedModel u = uniformize(random_exponential(g, 4, 2));
    for (int k = 0; k < 20; ++k) {
        const double t1 = testing::uniform(g, 0.0, 5.0), t2 = testing::uniform(g, 0.0, 5.0);
        const Matrix lhs = transition_over_time(u, 1, t1) * transition_over_time(u, 1, t2);
        CHECK((lhs - transition_over_time(u, 1, t1 + t2)).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("long horizons keep rows stochastic") {
    std::mt19937_64 g(5);
    const UniformizedModel u = uniformize(random_exponential(g, 3, 1));
    for (double factor : {1.0, 10.0, 100.0, 1000.0, 5000.0}) {
        const Matrix f = transition_over_time(u, 0, factor * u.d_bar);
        for (Eigen::Index i = 0; i < f.rows(); ++i) CHECK(std::abs(f.row(i).sum() - 1.0) <= 1e-10);
    }
}

TEST_CASE("timed belief updates") {
    std::mt19937_64 g(6);
    const SemiMarkovModel s = random_exponential(g, 3, 1);
    const UniformizedModel u = uniformize(s);
    const std::vector<Matrix> flat{Matrix::Constant(3, 2, 0.5)};
    const Belief b0(Vector::Unit(3, 0));

    CHECK(timed_belief_update(b0, 0, 1, 0.0, u, flat).probs() == b0.probs());

    const Belief once = timed_belief_update(b0, 0, 0, 2.0, u, flat);
    const Belief twice = timed_belief_update(timed_belief_update(b0, 0, 0, 1.0, u, flat), 0, 0, 1.0, u, flat);
    CHECK((once.probs() - twice.probs()).cwiseAbs().maxCoeff() <= 1e-9);

    // Far ahead, the belief forgets its start and settles on the stationary law of pbar.
    const Vector limit = testing::power_stationary(u.transition_bar[0]);
    const Belief late = timed_belief_update(b0, 0, 0, 500.0 * u.d_bar, u, flat);
    CHECK((late.probs() - limit).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("time-weighted stationary law is invariant under the timed transition") {
    std::mt19937_64 g(7);
    const SemiMarkovModel s = random_exponential(g, 4, 1);
    const Vector pi_ct = time_stationary_distribution(s, StationaryPolicy{{0, 0, 0, 0}});
    const UniformizedModel u = uniformize(s);
    for (double tau : {0.3, 2.0, 11.0}) {
        const Vector moved = transition_over_time(u, 0, tau).transpose() * pi_ct;
        CHECK((moved - pi_ct).cwiseAbs().maxCoeff() <= 1e-10);
    }
}
