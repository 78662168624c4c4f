#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "itmdp/errors.hpp"
#include "itmdp/it_model.hpp"
#include "itmdp/mdp_core.hpp"
#include "support.hpp"

using namespace itmdp;

namespace {

it::ItParams example_a() {
    it::ItParams p;
    p.p_A = 0.5;
    p.p_F = 0.5;
    p.p_D = 0.6;
    p.p_R = 1.0;
    p.c_A = 1.0;
    p.c_D = 0.5;
    p.c_F = 10.0;
    p.c_R = 2.0;
    return p;
}

it::ItParams meeting_point() {
    it::ItParams p;
    p.p_A = 0.5;
    p.p_F = 0.3;
    p.p_D = 0.6;
    p.p_R = 1.0;
    p.c_R = 2.0;
    p.c_A = 2.0 / 3.0;
    p.c_D = 1.2;
    p.c_F = 10.0;
    return p;
}

GenericMdp one_state(std::vector<double> costs) {
    GenericMdp m;
    m.state_labels = {"only"};
    for (std::size_t u = 0; u < costs.size(); ++u) {
        m.action_labels.push_back("a" + std::to_string(u));
        m.transition.push_back(Matrix::Ones(1, 1));
        m.cost.push_back(Matrix::Constant(1, 1, costs[u]));
    }
    return m;
}

}  // namespace

TEST_CASE("validate accepts the three-state model") {
    CHECK(validate(it::build_mdp(example_a())).empty());
}

TEST_CASE("validate reports a short transition row with its deviation") {
    GenericMdp m = it::build_mdp(example_a());
    m.transition[1](2, 2) = 0.9;
    const auto v = validate(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == Violation::Kind::row_sum);
    CHECK(v[0].matrix == "transition");
    CHECK(v[0].action == 1);
    CHECK(v[0].row == 2);
    CHECK(v[0].deviation == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("validate reports a negative cost") {
    GenericMdp m = it::build_mdp(example_a());
    m.maintenance.reset();
    m.cost[0](0, 0) = -1.0;
    const auto v = validate(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == Violation::Kind::cost_negative);
}

TEST_CASE("validate reports shape, range and non-finite problems") {
    GenericMdp m = it::build_mdp(example_a());
    m.transition[0](0, 0) = 1.5;
    m.transition[0](0, 1) = -0.5;
    m.cost[2](1, 1) = std::numeric_limits<double>::infinity();
    const auto v = validate(m);
    bool range = false, nonfinite = false;
    for (const auto& x : v) {
        range = range || x.kind == Violation::Kind::probability_range;
        nonfinite = nonfinite || x.kind == Violation::Kind::cost_nonfinite;
    }
    CHECK(range);
    CHECK(nonfinite);

    GenericMdp bad = it::build_mdp(example_a());
    bad.cost.pop_back();
    CHECK_FALSE(validate(bad).empty());
    CHECK_THROWS_AS(require_valid(bad), InvalidInput);
}

TEST_CASE("validate checks observation rows") {
    GenericMdp m = one_state({1.0});
    m.observation = std::vector<Matrix>{Matrix::Constant(1, 2, 0.4)};
    const auto v = validate(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].matrix == "observation");
    CHECK(v[0].deviation == doctest::Approx(0.2));
}

TEST_CASE("evaluate_policy on the three-state model") {
    const GenericMdp m = it::build_mdp(example_a());
    const auto w = evaluate_policy(m, it::policy_of(it::Candidate::wait));
    CHECK(w.lambda == doctest::Approx(0.8).epsilon(1e-12));
    const auto r = evaluate_policy(m, it::policy_of(it::Candidate::reset));
    CHECK(r.lambda == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(w.bias(0) == 0.0);
    REQUIRE(w.lambda_maintenance);
    REQUIRE(w.lambda_failure);
    CHECK(*w.lambda_maintenance + *w.lambda_failure == doctest::Approx(w.lambda).epsilon(1e-12));
    CHECK(w.stationary_dist.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evaluate_policy agrees with a power-iteration reference") {
    std::mt19937_64 g(11);
    for (int k = 0; k < 50; ++k) {
        const GenericMdp m = testing::random_mdp(g, 4, 3);
        StationaryPolicy p{{0, 1, 2, 1}};
        const auto e = evaluate_policy(m, p);
        const Matrix pp = induced_transition(m, p);
        CHECK(e.lambda == doctest::Approx(testing::power_lambda(pp, induced_cost(m, p))).epsilon(1e-10));
        const Vector pi = testing::power_stationary(pp);
        CHECK((e.stationary_dist - pi).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("zero-cost policy has zero average cost") {
    std::mt19937_64 g(3);
    GenericMdp m = testing::random_mdp(g, 3, 2);
    m.cost[1].setZero();
    CHECK(evaluate_policy(m, StationaryPolicy{{1, 1, 1}}).lambda == 0.0);
}

TEST_CASE("gain/bias equations hold") {
    std::mt19937_64 g(5);
    const GenericMdp m = testing::random_mdp(g, 4, 2);
    const StationaryPolicy p{{1, 0, 0, 1}};
    const auto e = evaluate_policy(m, p);
    const Vector lhs = Vector::Constant(4, e.lambda) + e.bias;
    const Vector rhs = induced_cost(m, p) + induced_transition(m, p) * e.bias;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("multichain policy is rejected") {
    GenericMdp m;
    m.state_labels = {"x", "y"};
    m.action_labels = {"stay"};
    m.transition = {Matrix::Identity(2, 2)};
    m.cost = {Matrix::Ones(2, 2)};
    CHECK_THROWS_AS(evaluate_policy(m, StationaryPolicy{{0, 0}}), MultichainError);
    CHECK(recurrent_classes(m.transition[0]).size() == 2);
}

TEST_CASE("transient states get zero stationary mass") {
    Matrix p(3, 3);
    p << 0.5, 0.5, 0.0,
         0.0, 0.0, 1.0,
         0.0, 1.0, 0.0;
    const Vector pi = stationary_distribution(p);
    CHECK(pi(0) == 0.0);
    CHECK(pi(1) == doctest::Approx(0.5));
    CHECK(pi(2) == doctest::Approx(0.5));
}

TEST_CASE("policy validation") {
    const GenericMdp m = it::build_mdp(example_a());
    CHECK_THROWS_AS(evaluate_policy(m, StationaryPolicy{{0, 1}}), InvalidInput);
    CHECK_THROWS_AS(evaluate_policy(m, StationaryPolicy{{0, 3, 2}}), InvalidInput);
}

TEST_CASE("relative value iteration finds the three-way tie") {
    const auto r = relative_value_iteration(it::build_mdp(meeting_point()));
    CHECK(r.lambda == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    REQUIRE(r.greedy_sets[1].size() == 3);
    CHECK(r.greedy_sets[0] == std::vector<std::size_t>{0});
    CHECK(r.greedy_sets[2] == std::vector<std::size_t>{2});
}

TEST_CASE("relative value iteration on a one-state model") {
    const auto r = relative_value_iteration(one_state({3.0, 5.0}));
    CHECK(r.lambda == doctest::Approx(3.0));
    CHECK(r.policy.action_of_state == std::vector<std::size_t>{0});
}

TEST_CASE("relative value iteration reports non-convergence") {
    RviOptions o;
    o.max_iterations = 2;
    try {
        relative_value_iteration(it::build_mdp(example_a()), o);
        FAIL("expected NonConvergence");
    } catch (const NonConvergence& e) {
        CHECK(e.last_span() > 0.0);
    }
}

TEST_CASE("enumeration of the three-state model") {
    const GenericMdp m = it::build_mdp(example_a());
    const auto all = enumerate_policies(m);
    CHECK(all.size() == 27);
    REQUIRE(all.front().evaluation);
    const auto rvi = relative_value_iteration(m);
    CHECK(all.front().evaluation->lambda == doctest::Approx(rvi.lambda).epsilon(1e-9));
    CHECK(all.front().policy == it::policy_of(it::Candidate::defend));
    for (std::size_t k = 1; k < all.size(); ++k) {
        if (!all[k].evaluation) continue;
        CHECK(all[k - 1].evaluation->lambda <= all[k].evaluation->lambda);
        if (all[k].tie_group == all[k - 1].tie_group)
            CHECK(std::abs(all[k].evaluation->lambda - all[k - 1].evaluation->lambda) <= kTieTol);
    }
}

TEST_CASE("enumeration flags multichain policies and ranks them last") {
    const auto all = enumerate_policies(it::build_mdp(example_a()));
    bool seen = false;
    for (const auto& e : all) {
        if (e.multichain) seen = true;
        else CHECK_FALSE(seen);
        CHECK(e.multichain == !e.evaluation.has_value());
    }
}

TEST_CASE("enumeration of a one-state one-action model") {
    const auto all = enumerate_policies(one_state({4.0}));
    REQUIRE(all.size() == 1);
    CHECK(all[0].evaluation->lambda == 4.0);
}

TEST_CASE("enumeration size guard") {
    GenericMdp m;
    for (int i = 0; i < 13; ++i) m.state_labels.push_back("s");
    for (int u = 0; u < 3; ++u) {
        m.action_labels.push_back("a");
        m.transition.push_back(Matrix::Constant(13, 13, 1.0 / 13.0));
        m.cost.push_back(Matrix::Zero(13, 13));
    }
    CHECK_THROWS_AS(enumerate_policies(m), SizeLimitExceeded);
}

TEST_CASE("policy_from_index uses state 0 as least significant digit") {
    CHECK(policy_from_index(5, 3, 3).action_of_state == std::vector<std::size_t>{2, 1, 0});
    CHECK(policy_from_index(26, 3, 3).action_of_state == std::vector<std::size_t>{2, 2, 2});
}

TEST_CASE("enumerate with unreliable reset ranks reset-under-attack above the others") {
    // p_R well below p_F / (p_F + p_A) = 0.75.
    it::ItParams p = example_a();
    p.p_A = 0.1;
    p.p_F = 0.3;
    p.p_R = 0.2;
    p.p_D = 0.2;
    p.c_D = 0.3;
    p.c_A = 0.5;
    const auto all = enumerate_policies(it::build_mdp(p));
    double lw = 0, ld = 0, lr = 0;
    for (const auto& e : all) {
        if (e.policy == it::policy_of(it::Candidate::wait)) lw = e.evaluation->lambda;
        if (e.policy == it::policy_of(it::Candidate::defend)) ld = e.evaluation->lambda;
        if (e.policy == it::policy_of(it::Candidate::reset)) lr = e.evaluation->lambda;
    }
    CHECK(lr < lw);
    CHECK(lr < ld);
}
