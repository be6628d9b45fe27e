#include "hypergrad/problems/quadratic_bilevel.hpp"

#include <cmath>
#include <stdexcept>

namespace hypergrad {

namespace {

// Extreme eigenvalues of a symmetric matrix by power iteration on A and on
// (lmax I - A). Small dense problems only.
std::pair<double, double> extreme_eigs(const DenseMatrix& a) {
    const double lmax = power_iteration_sym([&](const RealVec& v) { return matvec(a, v); }, a.rows);
    const double shift = lmax + 1.0;
    const double lmin = shift - power_iteration_sym(
                                    [&](const RealVec& v) {
                                        RealVec u = matvec(a, v);
                                        for (std::size_t i = 0; i < u.size(); ++i) u[i] = shift * v[i] - u[i];
                                        return u;
                                    },
                                    a.rows);
    return {lmin, lmax};
}

double spectral_norm(const DenseMatrix& b) {
    const double s2 = power_iteration_sym([&](const RealVec& v) { return matvec_t(b, matvec(b, v)); }, b.cols);
    return std::sqrt(std::max(0.0, s2));
}

}  // namespace

QuadraticBilevel::QuadraticBilevel(DenseMatrix a, DenseMatrix b, RealVec w_target, QuadraticNoise noise,
                                   double noise_std)
    : a_(std::move(a)), b_(std::move(b)), w_target_(std::move(w_target)), noise_(noise), noise_std_(noise_std) {
    if (a_.rows != a_.cols) throw std::invalid_argument("quadratic_bilevel: A must be square");
    if (b_.rows != a_.rows) throw std::invalid_argument("quadratic_bilevel: B row count must match A");
    if (static_cast<std::int64_t>(w_target_.size()) != a_.rows)
        throw std::invalid_argument("quadratic_bilevel: w_target dimension mismatch");
    if (noise_std_ < 0.0) throw std::invalid_argument("quadratic_bilevel: noise std must be >= 0");
    for (std::int64_t i = 0; i < a_.rows; ++i)
        for (std::int64_t j = 0; j < i; ++j)
            if (std::fabs(a_(i, j) - a_(j, i)) > 1e-12 * (1.0 + std::fabs(a_(i, j))))
                throw std::invalid_argument("quadratic_bilevel: A must be symmetric");
    std::tie(tau_, big_l_) = extreme_eigs(a_);
    if (tau_ <= 0.0) throw std::invalid_argument("quadratic_bilevel: A must be positive definite");
    alpha_ = 2.0 / (tau_ + big_l_);
    q_ = (big_l_ - tau_) / (big_l_ + tau_);
    b_norm_ = spectral_norm(b_);
}

RealVec QuadraticBilevel::phi_mean(const RealVec& w, const RealVec& lam) const {
    // w - alpha (A w - B lam)
    RealVec aw = matvec(a_, w);
    const RealVec bl = matvec(b_, lam);
    RealVec out(w);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= alpha_ * (aw[i] - bl[i]);
    return out;
}

double QuadraticBilevel::lambda_noise_factor(const SampleKey& key) const {
    KeyedRng rng(key);
    return 1.0 + noise_std_ * rng.gaussian();
}

RealVec QuadraticBilevel::phi_sample(const RealVec& w, const RealVec& lam, const SampleKey& key) const {
    switch (noise_) {
        case QuadraticNoise::None:
            return phi_mean(w, lam);
        case QuadraticNoise::Additive: {
            RealVec out = phi_mean(w, lam);
            KeyedRng rng(key);
            for (double& v : out) v += noise_std_ * rng.gaussian();
            return out;
        }
        case QuadraticNoise::LambdaMultiplicative: {
            const double f = lambda_noise_factor(key);
            RealVec aw = matvec(a_, w);
            const RealVec bl = matvec(b_, lam);
            RealVec out(w);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] -= alpha_ * (aw[i] - f * bl[i]);
            return out;
        }
    }
    return phi_mean(w, lam);
}

RealVec QuadraticBilevel::jvp1_t_mean(const RealVec&, const RealVec&, const RealVec& v) const {
    // (I - alpha A)^T v, A symmetric
    RealVec av = matvec(a_, v);
    RealVec out(v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= alpha_ * av[i];
    return out;
}

RealVec QuadraticBilevel::jvp2_t_mean(const RealVec&, const RealVec&, const RealVec& v) const {
    // (alpha B)^T v
    RealVec out = matvec_t(b_, v);
    scale(out, alpha_);
    return out;
}

RealVec QuadraticBilevel::jvp2_t_sample(const RealVec& w, const RealVec& lam, const SampleKey& key,
                                        const RealVec& v) const {
    RealVec out = jvp2_t_mean(w, lam, v);
    if (noise_ == QuadraticNoise::LambdaMultiplicative) scale(out, lambda_noise_factor(key));
    return out;
}

double QuadraticBilevel::upper_value(const RealVec& w, const RealVec&) const {
    return 0.5 * sq_dist(w, w_target_);
}

RealVec QuadraticBilevel::upper_grad1(const RealVec& w, const RealVec&) const {
    RealVec out(w);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= w_target_[i];
    return out;
}

RealVec QuadraticBilevel::upper_grad2(const RealVec&, const RealVec&) const {
    return zeros(static_cast<std::size_t>(dim_lambda()));
}

std::optional<RealVec> QuadraticBilevel::fixed_point(const RealVec& lam) const {
    return solve_dense(a_, matvec(b_, lam));
}

std::optional<RealVec> QuadraticBilevel::exact_hypergrad(const RealVec& lam) const {
    RealVec w = *fixed_point(lam);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= w_target_[i];
    return matvec_t(b_, solve_dense(a_, std::move(w)));
}

ProblemConstants QuadraticBilevel::constants(const RealVec& lam) const {
    ProblemConstants c;
    c.q = q_;
    c.mu1 = 1.0;
    c.mu2 = 0.0;
    c.nu1 = 0.0;
    c.nu2 = 0.0;
    c.L_Phi = alpha_ * b_norm_;
    c.L_PhiTilde = q_;  // both noise modes leave the w-Jacobian exact

    const RealVec w_lam = *fixed_point(lam);
    // Lipschitz bound for the upper objective on the region the iterates
    // visit: ||grad1 E|| = ||w - w_target|| at the fixed point.
    c.L_E = norm2(upper_grad1(w_lam, lam));

    const double d = static_cast<double>(dim_w());
    double var_fp = 0.0;  // trace variance of the sampled map at w(lam)
    switch (noise_) {
        case QuadraticNoise::None:
            break;
        case QuadraticNoise::Additive:
            var_fp = d * noise_std_ * noise_std_;
            break;
        case QuadraticNoise::LambdaMultiplicative: {
            const RealVec bl = matvec(b_, lam);
            var_fp = alpha_ * alpha_ * noise_std_ * noise_std_ * dot(bl, bl);
            c.m2 = alpha_ * alpha_ * noise_std_ * noise_std_ * b_norm_ * b_norm_;
            break;
        }
    }
    c.sigma_lam1 = 2.0 * var_fp;
    c.sigma1_lower = 2.0 * var_fp;
    c.sigma2_lower = 0.0;  // the noise does not depend on w in either mode
    c.sigma_lam2 = 2.0 * (c.L_PhiTilde * c.L_PhiTilde + q_ * q_) / ((1.0 - q_) * (1.0 - q_));
    return c;
}

QuadraticBilevel quadratic_bilevel(DenseMatrix a, DenseMatrix b, RealVec w_target, QuadraticNoise noise,
                                   double noise_std) {
    return {std::move(a), std::move(b), std::move(w_target), noise, noise_std};
}

QuadraticBilevel canonical_quadratic(QuadraticNoise noise, double noise_std) {
    DenseMatrix a(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 4.0;
    DenseMatrix b(2, 2);
    b(0, 0) = 1.0;
    b(1, 1) = 1.0;
    return {std::move(a), std::move(b), RealVec{1.0, 1.0}, noise, noise_std};
}

RealVec quadratic_exact_hypergrad(const QuadraticBilevel& problem, const RealVec& lam) {
    return *problem.exact_hypergrad(lam);
}

}  // namespace hypergrad
