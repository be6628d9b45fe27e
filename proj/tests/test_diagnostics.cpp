#include <doctest.h>

#include <cmath>

#include "hypergrad/diagnostics.hpp"
#include "hypergrad/problems/logistic.hpp"
#include "hypergrad/problems/quadratic_bilevel.hpp"
#include "hypergrad/problems/toy_contraction.hpp"
#include "oracle_helpers.hpp"

using namespace hypergrad;

namespace {

Dataset tiny_dataset() {
    Dataset ds;
    ds.n = 4;
    ds.d = 2;
    ds.X = {0.5, -1.0, 1.5, 0.25, -0.75, 2.0, 0.1, -0.3};
    ds.y = {1, -1, 1, -1};
    return ds;
}

// psi'(u) = -1/(1+e^u), recoded for the oracle
double psi_d1_ref(double u) { return -1.0 / (1.0 + std::exp(u)); }

}  // namespace

TEST_CASE("deterministic problems have zero mean gap") {
    const auto quad = canonical_quadratic();
    const auto rep = check_unbiasedness(quad, {0.3, -0.2}, {1.0, 1.0}, 50, 7);
    CHECK(rep.mean_gap == 0.0);
    CHECK(rep.mc_std == 0.0);
}

TEST_CASE("toy contraction sampler is unbiased within Monte-Carlo error") {
    const ToyContraction toy(0.5, {1.0, -2.0}, 0.3);
    const auto rep = check_unbiasedness(toy, {0.1, 0.2}, {}, 10000, 11);
    CHECK(rep.mean_gap <= 4.0 * rep.mc_std);
    CHECK(rep.mc_std > 0.0);
}

TEST_CASE("sum-scaled minibatch map is unbiased") {
    const RegLogistic prob(tiny_dataset(), tiny_dataset(), RegMode::Single, 2);
    const RealVec w{0.4, -0.6};
    const RealVec lam{1.0};

    SUBCASE("exhaustive average over all batch draws equals the full map") {
        // b = 2 iid with replacement: 16 equally likely (i, j) pairs. The
        // batch map is w - alpha((n/b)(t_i + t_j) + lam w) with
        // t_i = psi'(y_i x_i^T w) y_i x_i, so the average must equal
        // phi_mean exactly.
        const Dataset ds = tiny_dataset();
        const double alpha = logistic_constants(prob, lam).alpha;
        RealVec avg(2, 0.0);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                RealVec g(2, 0.0);
                for (int idx : {i, j}) {
                    const auto row = ds.row(idx);
                    const double y = ds.y[static_cast<std::size_t>(idx)];
                    const double coef = psi_d1_ref(y * dot(row, w)) * y * (4.0 / 2.0);
                    axpy(coef, row, g);
                }
                for (std::size_t c = 0; c < 2; ++c) avg[c] += (w[c] - alpha * (g[c] + lam[0] * w[c])) / 16.0;
            }
        }
        const RealVec mean = prob.phi_mean(w, lam);
        CHECK(std::sqrt(sq_dist(avg, mean)) <= 1e-12);
    }

    SUBCASE("sampled capabilities pass the Monte-Carlo gap check") {
        for (const auto cap : {SampledCapability::Phi, SampledCapability::Jvp1T}) {
            const auto rep = check_unbiasedness(prob, w, lam, 10000, 13, cap);
            CHECK(rep.mean_gap <= 4.0 * rep.mc_std);
        }
        // the lam-Jacobian is deterministic: zero gap, zero spread
        const auto rep2 = check_unbiasedness(prob, w, lam, 100, 13, SampledCapability::Jvp2T);
        CHECK(rep2.mean_gap == 0.0);
        CHECK(rep2.mc_std == 0.0);
    }
}

TEST_CASE("check_unbiasedness rejects bad sample counts") {
    const auto quad = canonical_quadratic();
    CHECK_THROWS(check_unbiasedness(quad, {0.0, 0.0}, {1.0, 1.0}, 1, 7));
}

TEST_CASE("contraction estimate: toy map") {
    const ToyContraction toy(0.5, {1.0, 1.0}, 0.0);
    const auto est = estimate_contraction(toy, {}, 3, 50, 17);
    CHECK(est.q_est == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(est.verified);
}

TEST_CASE("contraction estimate: quadratic matches the eigenvalue oracle") {
    const auto quad = canonical_quadratic();
    // max |1 - alpha eig(A)| with alpha = 1/3, eig = {2, 4}
    const double expect = std::max(std::fabs(1.0 - 2.0 / 3.0), std::fabs(1.0 - 4.0 / 3.0));
    const auto est = estimate_contraction(quad, {1.0, 1.0}, 2, 200, 19);
    CHECK(est.q_est == doctest::Approx(expect).epsilon(1e-8));
    CHECK(est.verified);
}

TEST_CASE("contraction estimate: logistic matches the dense-Hessian oracle") {
    const Dataset ds = tiny_dataset();
    const RegLogistic prob(ds, ds, RegMode::Single, 4);
    const RealVec lam{0.7};
    const auto est = estimate_contraction(prob, lam, 4, 400, 23);

    // dense Jacobian I - alpha H(w) at each probe is dominated by the
    // regularizer bound; the operator norm never exceeds the analytic q and
    // the estimate must stay within it
    const auto sc = logistic_constants(prob, lam);
    CHECK(est.q_est <= sc.q + 1e-9);
    CHECK(est.verified);

    // at w = 0 (the first probe point) compare against the dense Jacobian
    const RealVec w0(2, 0.0);
    DenseMatrix jac(2, 2);
    for (int c = 0; c < 2; ++c) {
        RealVec e(2, 0.0);
        e[static_cast<std::size_t>(c)] = 1.0;
        const RealVec col = prob.jvp1_t_mean(w0, lam, e);
        for (int r = 0; r < 2; ++r) jac(r, c) = col[static_cast<std::size_t>(r)];
    }
    const double dense_norm = oracle::spectral_norm_dense(jac);
    const auto est0 = estimate_contraction(prob, lam, 1, 400, 23);  // single probe = origin
    CHECK(est0.q_est == doctest::Approx(dense_norm).epsilon(1e-6));
}

TEST_CASE("variance constants") {
    SUBCASE("deterministic problem has zero variance") {
        const auto quad = canonical_quadratic();
        const auto est = estimate_variance_constants(quad, {1.0, 1.0}, {0.5, 0.5}, 200, 29);
        CHECK(est.sigma1_hat == 0.0);
        CHECK(est.m2_hat == 0.0);
    }
    SUBCASE("toy gaussian noise: sigma1 = 2 d s^2") {
        const double s = 0.1;
        const ToyContraction toy(0.5, {1.0, 1.0}, s);
        const auto est = estimate_variance_constants(toy, {}, {0.2, -0.2}, 40000, 31);
        CHECK(est.sigma1_hat == doctest::Approx(2.0 * 2.0 * s * s).epsilon(0.05));
    }
    SUBCASE("separable logistic: m2 = 0") {
        const RegLogistic prob(tiny_dataset(), tiny_dataset(), RegMode::PerFeature, 2);
        const auto est = estimate_variance_constants(prob, {1.0, 2.0}, {0.3, 0.4}, 500, 37);
        CHECK(est.m2_hat == 0.0);
    }
}

TEST_CASE("built-in problems satisfy the module contracts") {
    const RealVec lam_q{1.0, 1.0};
    const auto quad = canonical_quadratic(QuadraticNoise::Additive, 0.05);
    const ToyContraction toy(0.7, {1.0, 2.0}, 0.1);
    const RegLogistic logi(tiny_dataset(), tiny_dataset(), RegMode::Single, 2);

    CHECK(check_unbiasedness(quad, {0.2, 0.1}, lam_q, 8000, 41).mean_gap <=
          4.0 * check_unbiasedness(quad, {0.2, 0.1}, lam_q, 8000, 41).mc_std);
    CHECK(check_unbiasedness(toy, {0.0, 0.0}, {}, 8000, 43).mean_gap <=
          4.0 * check_unbiasedness(toy, {0.0, 0.0}, {}, 8000, 43).mc_std);

    CHECK(estimate_contraction(quad, lam_q, 2, 100, 47).verified);
    CHECK(estimate_contraction(toy, {}, 2, 100, 47).verified);
    CHECK(estimate_contraction(logi, {1.0}, 2, 100, 47).verified);

    // noisy lam-Jacobian is still unbiased
    const auto mult = canonical_quadratic(QuadraticNoise::LambdaMultiplicative, 0.4);
    const auto rep = check_unbiasedness(mult, {0.3, 0.2}, lam_q, 8000, 53, SampledCapability::Jvp2T);
    CHECK(rep.mean_gap <= 4.0 * rep.mc_std);
}
