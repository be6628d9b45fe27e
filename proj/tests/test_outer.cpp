#include <doctest.h>

#include <cmath>

#include "hypergrad/outer.hpp"
#include "hypergrad/problems/logistic.hpp"
#include "hypergrad/problems/quadratic_bilevel.hpp"

using namespace hypergrad;

TEST_CASE("hyper-domain projections") {
    const auto pos = HyperDomain::positive_orthant(0.0);
    CHECK(pos.project({-1.0, 2.0}) == RealVec{0.0, 2.0});
    CHECK(pos.contains({0.0, 1.0}));
    CHECK(!pos.contains({-0.1, 1.0}));

    const auto box = HyperDomain::box({0.0, 0.0}, {1.0, 2.0});
    CHECK(box.project({-5.0, 5.0}) == RealVec{0.0, 2.0});
    CHECK(box.project({0.5, 0.5}) == RealVec{0.5, 0.5});
    CHECK_THROWS(HyperDomain::box({1.0}, {0.0}));

    // projection is idempotent
    const RealVec once = box.project({3.0, -1.0});
    CHECK(box.project(once) == once);
}

TEST_CASE("zero learning rate keeps lambda fixed") {
    const auto quad = canonical_quadratic();
    OuterConfig cfg;
    cfg.steps = 5;
    cfg.lr = 0.0;
    cfg.use_oracle = true;
    const auto trace = outer_sgd(quad, {1.0, 1.0}, HyperDomain::unconstrained(), cfg, 1);
    REQUIRE(trace.steps.size() == 5);
    for (const auto& s : trace.steps) CHECK(s.lambda == RealVec{1.0, 1.0});
}

TEST_CASE("oracle gradient descent reaches the quadratic argmin") {
    const auto quad = canonical_quadratic();
    OuterConfig cfg;
    cfg.steps = 300;
    cfg.lr = 3.0;  // L_f = 1/4, stable well below 2/L_f = 8
    cfg.use_oracle = true;
    const auto trace = outer_sgd(quad, {0.0, 0.0}, HyperDomain::unconstrained(), cfg, 1);
    const RealVec last = trace.steps.back().lambda;
    CHECK(last[0] == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(last[1] == doctest::Approx(4.0).epsilon(1e-5));
}

TEST_CASE("oracle descent is monotone below the curvature limit") {
    const auto quad = canonical_quadratic();
    OuterConfig cfg;
    cfg.steps = 60;
    cfg.lr = 2.0;
    cfg.use_oracle = true;
    const auto trace = outer_sgd(quad, {5.0, -3.0}, HyperDomain::unconstrained(), cfg, 1);
    for (std::size_t i = 1; i < trace.steps.size(); ++i)
        CHECK(trace.steps[i].f_estimate <= trace.steps[i - 1].f_estimate + 1e-12);
}

TEST_CASE("projection safety along a trace") {
    const auto quad = canonical_quadratic();
    const auto domain = HyperDomain::box({0.5, 0.5}, {1.5, 1.5});
    OuterConfig cfg;
    cfg.steps = 40;
    cfg.lr = 10.0;  // deliberately overshooting
    cfg.use_oracle = true;
    const auto trace = outer_sgd(quad, {1.0, 1.0}, domain, cfg, 1);
    for (const auto& s : trace.steps) CHECK(domain.contains(s.lambda));
}

TEST_CASE("multiplicative initialization stays positive without projection") {
    KeyedRng rng({derive_stream(123, 0), 0});
    RealVec lam0(6);
    for (double& v : lam0) v = std::exp(-2.0 + 4.0 * rng.uniform());
    const auto pos = HyperDomain::positive_orthant(0.0);
    CHECK(pos.contains(lam0));
    CHECK(pos.project(lam0) == lam0);
}

TEST_CASE("warm start cannot change the first step") {
    const auto quad = canonical_quadratic(QuadraticNoise::Additive, 0.1);
    OuterConfig warm_on;
    warm_on.steps = 1;
    warm_on.lr = 0.5;
    warm_on.estimator.t = 40;
    warm_on.estimator.k = 40;
    warm_on.estimator.lower = StepSchedule::fixed(0.5);
    warm_on.estimator.linear = StepSchedule::fixed(0.5);
    warm_on.warm_start = true;
    OuterConfig warm_off = warm_on;
    warm_off.warm_start = false;

    // run two steps to compare the lambda reached after step 0
    warm_on.steps = warm_off.steps = 2;
    const auto a = outer_sgd(quad, {1.0, 1.0}, HyperDomain::positive_orthant(0.0), warm_on, 7);
    const auto b = outer_sgd(quad, {1.0, 1.0}, HyperDomain::positive_orthant(0.0), warm_off, 7);
    CHECK(a.steps[1].lambda == b.steps[1].lambda);
}

TEST_CASE("warm start changes later steps and stays finite") {
    const auto quad = canonical_quadratic(QuadraticNoise::Additive, 0.1);
    OuterConfig cfg;
    cfg.steps = 6;
    cfg.lr = 0.2;
    cfg.estimator.t = 30;
    cfg.estimator.k = 30;
    cfg.estimator.lower = StepSchedule::fixed(0.5);
    cfg.estimator.linear = StepSchedule::fixed(0.5);
    cfg.warm_start = true;
    const auto a = outer_sgd(quad, {1.0, 1.0}, HyperDomain::positive_orthant(0.0), cfg, 7);
    cfg.warm_start = false;
    const auto b = outer_sgd(quad, {1.0, 1.0}, HyperDomain::positive_orthant(0.0), cfg, 7);
    REQUIRE(a.steps.size() == 6);
    CHECK(a.steps.back().lambda != b.steps.back().lambda);
}

TEST_CASE("evaluate on a zero design gives the majority-class rate") {
    Dataset tr;
    tr.n = 4;
    tr.d = 2;
    tr.X.assign(8, 0.0);
    tr.y = {1, 1, 1, -1};  // majority +1, matching the sign(0) = +1 tie-break
    const RegLogistic prob(tr, tr, RegMode::Single, 2);
    const auto rep = evaluate(prob, {1.0}, &tr);
    REQUIRE(rep.accuracy.has_value());
    CHECK(*rep.accuracy == doctest::Approx(0.75));
    CHECK(rep.val_loss == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-9));
    CHECK(rep.val_loss >= 0.0);
}

TEST_CASE("separable two-point problem is classified perfectly") {
    Dataset tr;
    tr.n = 2;
    tr.d = 1;
    tr.X = {1.0, -1.0};
    tr.y = {1, -1};
    const RegLogistic prob(tr, tr, RegMode::Single, 2);

    OuterConfig cfg;
    cfg.steps = 10;
    cfg.lr = 0.05;
    cfg.estimator.t = 200;
    cfg.estimator.k = 200;
    cfg.estimator.deterministic = true;
    cfg.eval_every = 1;
    cfg.test_set = &tr;
    const auto trace = outer_sgd(prob, {0.5}, HyperDomain::positive_orthant(1e-6), cfg, 3);
    REQUIRE(trace.steps.back().test_accuracy.has_value());
    CHECK(*trace.steps.back().test_accuracy == doctest::Approx(1.0));
}

TEST_CASE("outer rejects infeasible starts") {
    const auto quad = canonical_quadratic();
    OuterConfig cfg;
    cfg.use_oracle = true;
    CHECK_THROWS(outer_sgd(quad, {-1.0, 1.0}, HyperDomain::positive_orthant(0.0), cfg, 1));
}
