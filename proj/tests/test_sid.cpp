#include <doctest.h>

#include <cmath>
#include <cstring>

#include "hypergrad/sid.hpp"
#include "hypergrad/problems/logistic.hpp"
#include "hypergrad/problems/quadratic_bilevel.hpp"
#include "oracle_helpers.hpp"

using namespace hypergrad;

namespace {

Dataset small_logistic_data(int n, int d, std::uint64_t seed) {
    Dataset ds;
    ds.n = n;
    ds.d = d;
    KeyedRng rng({derive_stream(seed, 0), 0});
    ds.X.resize(static_cast<std::size_t>(n * d));
    for (auto& v : ds.X) v = rng.gaussian() / std::sqrt(static_cast<double>(d));
    ds.y.resize(static_cast<std::size_t>(n));
    for (auto& y : ds.y) y = rng.uniform() < 0.5 ? -1 : 1;
    return ds;
}

bool bit_identical(const RealVec& a, const RealVec& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("linear system map") {
    const auto quad = canonical_quadratic();
    const RealVec lam{1.0, 1.0};
    const RealVec w{0.3, 0.9};

    SUBCASE("zero upper gradient has fixed point zero") {
        // at w = w_target the cached gradient vanishes
        const LinearSystemMap lin(quad, {1.0, 1.0}, lam);
        const RealVec z(2, 0.0);
        CHECK(norm2(lin.psi_mean(z)) == 0.0);
    }

    SUBCASE("fixed point matches the dense solve") {
        const LinearSystemMap lin(quad, w, lam);
        // iterate the affine contraction far past convergence
        RealVec v(2, 0.0);
        for (int i = 0; i < 400; ++i) v = lin.psi_mean(v);
        // oracle: (alpha A) v = w - w_target with alpha = 1/3, A = diag(2,4)
        DenseMatrix aa(2, 2);
        aa(0, 0) = 2.0 / 3.0;
        aa(1, 1) = 4.0 / 3.0;
        const RealVec expect = solve_dense(aa, {w[0] - 1.0, w[1] - 1.0});
        CHECK(std::sqrt(sq_dist(v, expect)) <= 1e-10);
    }

    SUBCASE("two applications from zero unroll the affine recursion") {
        const LinearSystemMap lin(quad, w, lam);
        const RealVec g1 = quad.upper_grad1(w, lam);
        RealVec expect = quad.jvp1_t_mean(w, lam, g1);
        for (std::size_t i = 0; i < expect.size(); ++i) expect[i] += g1[i];
        const RealVec got = lin.psi_mean(lin.psi_mean(RealVec(2, 0.0)));
        CHECK(bit_identical(got, expect));
    }
}

TEST_CASE("solve_lower on the quadratic") {
    const auto quad = canonical_quadratic();
    const RealVec lam{2.0, 4.0};
    const RealVec w_star = *quad.fixed_point(lam);

    SUBCASE("zero iterations returns the zero initialization") {
        const auto traj = solve_lower(quad, lam, 0, StepSchedule::fixed(1.0), {derive_stream(1, 0), 0});
        CHECK(norm2(traj.final) == 0.0);
    }
    SUBCASE("geometric convergence at rate q") {
        const auto traj = solve_lower(quad, lam, 200, StepSchedule::fixed(1.0), {derive_stream(1, 0), 0});
        const double err = std::sqrt(sq_dist(traj.final, w_star));
        CHECK(err <= std::pow(quad.q(), 200) * norm2(w_star) + 1e-13);
    }
}

TEST_CASE("solve_linear on the quadratic") {
    const auto quad = canonical_quadratic();
    const RealVec lam{1.0, 1.0};
    const RealVec w{0.25, -0.5};

    SUBCASE("zero iterations returns zero") {
        const auto traj = solve_linear(quad, w, lam, 0, StepSchedule::fixed(1.0), {derive_stream(2, 0), 0});
        CHECK(norm2(traj.final) == 0.0);
    }
    SUBCASE("geometric convergence to the dense solution") {
        DenseMatrix aa(2, 2);
        aa(0, 0) = 2.0 / 3.0;
        aa(1, 1) = 4.0 / 3.0;
        const RealVec v_star = solve_dense(aa, {w[0] - 1.0, w[1] - 1.0});
        const auto traj = solve_linear(quad, w, lam, 120, StepSchedule::fixed(1.0), {derive_stream(2, 0), 0});
        CHECK(std::sqrt(sq_dist(traj.final, v_star)) <= std::pow(quad.q(), 120) * norm2(v_star) + 1e-12);
    }
    SUBCASE("zero upper gradient keeps the iterate at zero") {
        const auto traj =
            solve_linear(quad, {1.0, 1.0}, lam, 50, StepSchedule::fixed(1.0), {derive_stream(2, 0), 0});
        CHECK(norm2(traj.final) == 0.0);
    }
}

TEST_CASE("sid_estimate on the noise-free quadratic") {
    const auto quad = canonical_quadratic();
    const StepSchedule unit = StepSchedule::fixed(1.0);

    SUBCASE("at the self-consistent hyperparameter the gradient vanishes") {
        const auto est = sid_estimate(quad, {2.0, 4.0}, 200, 200, unit, unit, 5);
        CHECK(norm2(est.grad) <= 1e-6);
    }
    SUBCASE("closed form at lambda = 0") {
        const auto est = sid_estimate(quad, {0.0, 0.0}, 200, 200, unit, unit, 5);
        CHECK(est.grad[0] == doctest::Approx(-0.5).epsilon(1e-6));
        CHECK(est.grad[1] == doctest::Approx(-0.25).epsilon(1e-6));
    }
    SUBCASE("provenance fields") {
        const auto est = sid_estimate(quad, {1.0, 1.0}, 10, 20, unit, unit, 5, 3);
        CHECK(est.t == 10);
        CHECK(est.k == 20);
        CHECK(est.jvp_samples == 3);
        CHECK(est.seeds[0] != est.seeds[1]);
        CHECK(est.seeds[1] != est.seeds[2]);
        CHECK(est.seeds[0] != est.seeds[2]);
    }
}

TEST_CASE("replicate mean of the noisy estimator matches the closed form") {
    const auto quad = canonical_quadratic(QuadraticNoise::Additive, 0.1);
    const RealVec lam{1.0, 1.0};
    const RealVec exact = *quad.exact_hypergrad(lam);
    const auto consts = quad.constants(lam);
    const auto sched = StepSchedule::decreasing(consts.q, consts.sigma_lam2);

    const int reps = 1000;
    RealVec mean(2, 0.0);
    std::vector<RealVec> grads;
    grads.reserve(reps);
    for (int r = 0; r < reps; ++r) {
        const auto est = sid_estimate(quad, lam, 500, 500, sched, sched, 1000 + static_cast<std::uint64_t>(r));
        grads.push_back(est.grad);
        axpy(1.0 / reps, est.grad, mean);
    }
    // per-coordinate Monte-Carlo std of the replicate mean
    for (int c = 0; c < 2; ++c) {
        double var = 0.0;
        for (const auto& g : grads) {
            const double d = g[static_cast<std::size_t>(c)] - mean[static_cast<std::size_t>(c)];
            var += d * d;
        }
        var /= reps;
        const double mc_std = std::sqrt(var / reps);
        CHECK(std::fabs(mean[static_cast<std::size_t>(c)] - exact[static_cast<std::size_t>(c)]) <=
              3.0 * mc_std + 2e-3);  // small surviving bias at t = k = 500
    }
}

TEST_CASE("aid_batch") {
    const auto quad = canonical_quadratic();

    SUBCASE("zero budget returns the partial upper gradient") {
        const auto est = aid_batch(quad, {1.0, 1.0}, 0, 0);
        CHECK(bit_identical(est.grad, quad.upper_grad2({0.0, 0.0}, {1.0, 1.0})));
    }
    SUBCASE("matches the closed form to 1e-8") {
        const RealVec lam{0.5, -0.3};
        const auto est = aid_batch(quad, lam, 200, 200);
        const RealVec exact = *quad.exact_hypergrad(lam);
        CHECK(std::sqrt(sq_dist(est.grad, exact)) <= 1e-8 * (1.0 + norm2(exact)));
    }
    SUBCASE("agrees with finite differences on a small logistic problem") {
        const Dataset tr = small_logistic_data(8, 2, 101);
        const Dataset va = small_logistic_data(8, 2, 102);
        const RegLogistic prob(tr, va, RegMode::Single, 8);
        const RealVec lam{0.5};
        const auto est = aid_batch(prob, lam, 2000, 2000);
        const auto f = [&](const RealVec& l) {
            const RealVec w = prob.solve_fixed_point(l, 1e-12);
            return prob.upper_value(w, l);
        };
        const RealVec fd = oracle::central_fd(f, lam, 1e-5);
        CHECK(std::fabs(est.grad[0] - fd[0]) <= 1e-5 * std::max(1.0, std::fabs(fd[0])));
    }
}

TEST_CASE("aid_batch and sid_estimate coincide bitwise without noise") {
    const auto quad = canonical_quadratic();  // zero-variance samplers
    const RealVec lam{0.7, 1.3};
    const auto a = aid_batch(quad, lam, 37, 23);
    const auto b = sid_estimate(quad, lam, 37, 23, StepSchedule::fixed(1.0), StepSchedule::fixed(1.0), 99, 1);
    CHECK(bit_identical(a.grad, b.grad));
}

TEST_CASE("stream separation") {
    const auto quad = canonical_quadratic(QuadraticNoise::Additive, 0.2);
    const RealVec lam{1.0, 1.0};
    const StepSchedule sched = StepSchedule::constant_step(0.0, 0.5);

    const auto a = sid_estimate(quad, lam, 50, 50, sched, sched, 1234);
    const auto b = sid_estimate(quad, lam, 50, 50, sched, sched, 1234);
    CHECK(bit_identical(a.grad, b.grad));

    // permuting the substream assignment changes the result
    const auto c = sid_estimate_with_streams(quad, lam, 50, 50, sched, sched, derive_stream(1234, 1),
                                             derive_stream(1234, 0), derive_stream(1234, 2));
    CHECK(!bit_identical(a.grad, c.grad));

    CHECK_THROWS(sid_estimate_with_streams(quad, lam, 5, 5, sched, sched, 7, 7, 8));
}

TEST_CASE("quadratic form diagnostic") {
    const auto quad = canonical_quadratic();
    const RealVec lam{1.0, 1.0};
    const RealVec w{0.4, 0.2};

    SUBCASE("zero vector gives zero") {
        CHECK(quadratic_form_value(quad, {0.0, 0.0}, w, lam) == 0.0);
    }
    SUBCASE("minimum value at the linear-system solution") {
        DenseMatrix aa(2, 2);
        aa(0, 0) = 2.0 / 3.0;
        aa(1, 1) = 4.0 / 3.0;
        const RealVec g1 = quad.upper_grad1(w, lam);
        const RealVec v_star = solve_dense(aa, g1);
        const double val = quadratic_form_value(quad, v_star, w, lam);
        CHECK(val == doctest::Approx(-0.5 * dot(v_star, g1)).epsilon(1e-12));
    }
    SUBCASE("decreases monotonically along the deterministic solver") {
        const LinearSystemMap lin(quad, w, lam);
        RealVec v(2, 0.0);
        double prev = quadratic_form_value(quad, v, w, lam);
        for (int i = 0; i < 30; ++i) {
            v = lin.psi_mean(v);
            const double cur = quadratic_form_value(quad, v, w, lam);
            CHECK(cur <= prev + 1e-15);
            prev = cur;
        }
    }
    SUBCASE("rejected for non-minimization maps") {
        const class : public Problem {
        public:
            int dim_w() const override { return 1; }
            int dim_lambda() const override { return 0; }
            RealVec phi_mean(const RealVec& w, const RealVec&) const override { return w; }
            RealVec jvp1_t_mean(const RealVec&, const RealVec&, const RealVec& v) const override { return v; }
            RealVec jvp2_t_mean(const RealVec&, const RealVec&, const RealVec&) const override { return {}; }
            double upper_value(const RealVec&, const RealVec&) const override { return 0.0; }
            RealVec upper_grad1(const RealVec& w, const RealVec&) const override { return w; }
            RealVec upper_grad2(const RealVec&, const RealVec&) const override { return {}; }
            ProblemConstants constants(const RealVec&) const override { return {}; }
        } non_min;
        CHECK_THROWS(quadratic_form_value(non_min, {1.0}, {1.0}, {}));
    }
}

TEST_CASE("bias decreases with the budget on the noisy quadratic") {
    const auto quad = canonical_quadratic(QuadraticNoise::Additive, 0.3);
    const RealVec lam{1.0, 1.0};
    const RealVec exact = *quad.exact_hypergrad(lam);
    const auto consts = quad.constants(lam);
    const auto sched = StepSchedule::decreasing(consts.q, consts.sigma_lam2);

    const int reps = 2000;
    double bias[3] = {0, 0, 0};
    double mc[3] = {0, 0, 0};
    const std::int64_t budgets[3] = {10, 100, 1000};
    for (int b = 0; b < 3; ++b) {
        RealVec mean(2, 0.0);
        std::vector<RealVec> grads;
        grads.reserve(reps);
        for (int r = 0; r < reps; ++r) {
            const auto est = sid_estimate(quad, lam, budgets[b], budgets[b], sched, sched,
                                          derive_stream(777, static_cast<std::uint64_t>(b * reps + r)));
            grads.push_back(est.grad);
            axpy(1.0 / reps, est.grad, mean);
        }
        bias[b] = std::sqrt(sq_dist(mean, exact));
        double var = 0.0;
        for (const auto& g : grads) var += sq_dist(g, mean);
        mc[b] = std::sqrt(var / reps / reps);  // std of the mean vector norm, coarse
    }
    CHECK(bias[1] < bias[0] + 2.0 * (mc[0] + mc[1]));
    CHECK(bias[2] < bias[1] + 2.0 * (mc[1] + mc[2]));
    CHECK(bias[2] < bias[0]);
}
