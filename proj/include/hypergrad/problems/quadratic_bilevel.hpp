#pragma once

#include "hypergrad/linalg.hpp"
#include "hypergrad/problem.hpp"

namespace hypergrad {

enum class QuadraticNoise { None, Additive, LambdaMultiplicative };

/// Bilevel problem with closed-form oracles. Lower objective
/// (1/2) w^T A w - (B lam)^T w with SPD A, so the gradient-step map
/// Phi = w - alpha (A w - B lam), alpha = 2/(tau + L), has fixed point
/// w(lam) = A^{-1} B lam and contraction modulus q = (L - tau)/(L + tau).
/// Upper objective (1/2)||w - w_target||^2, hence
/// grad f(lam) = B^T A^{-1} (w(lam) - w_target).
///
/// Noise modes for the sampled map:
///   None:                exact (zero-variance sampler)
///   Additive:            Phi + s g, g standard normal; the Jacobians stay
///                        exact, so m2 = 0
///   LambdaMultiplicative: the lam-coupling is scaled by (1 + s xi) with a
///                        scalar standard normal xi, so d2Phi is noisy and
///                        m2 = alpha^2 s^2 ||B||^2 > 0 (analytic)
class QuadraticBilevel final : public Problem {
public:
    QuadraticBilevel(DenseMatrix a, DenseMatrix b, RealVec w_target,
                     QuadraticNoise noise = QuadraticNoise::None, double noise_std = 0.0);

    int dim_w() const override { return static_cast<int>(a_.rows); }
    int dim_lambda() const override { return static_cast<int>(b_.cols); }

    RealVec phi_mean(const RealVec& w, const RealVec& lam) const override;
    RealVec phi_sample(const RealVec& w, const RealVec& lam, const SampleKey& key) const override;
    RealVec jvp1_t_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const override;
    RealVec jvp2_t_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const override;
    RealVec jvp2_t_sample(const RealVec& w, const RealVec& lam, const SampleKey& key,
                          const RealVec& v) const override;
    double upper_value(const RealVec& w, const RealVec& lam) const override;
    RealVec upper_grad1(const RealVec& w, const RealVec& lam) const override;
    RealVec upper_grad2(const RealVec& w, const RealVec& lam) const override;
    std::optional<RealVec> fixed_point(const RealVec& lam) const override;
    std::optional<RealVec> exact_hypergrad(const RealVec& lam) const override;
    bool is_minimization() const override { return true; }
    ProblemConstants constants(const RealVec& lam) const override;
    double contraction_modulus(const RealVec&) const override { return q_; }

    double alpha() const { return alpha_; }
    double q() const { return q_; }
    double eig_min() const { return tau_; }
    double eig_max() const { return big_l_; }

private:
    double lambda_noise_factor(const SampleKey& key) const;

    DenseMatrix a_;
    DenseMatrix b_;
    RealVec w_target_;
    QuadraticNoise noise_;
    double noise_std_;
    double tau_ = 0.0;    // smallest eigenvalue of A
    double big_l_ = 0.0;  // largest eigenvalue of A
    double alpha_ = 0.0;
    double q_ = 0.0;
    double b_norm_ = 0.0;  // spectral norm of B
};

QuadraticBilevel quadratic_bilevel(DenseMatrix a, DenseMatrix b, RealVec w_target,
                                   QuadraticNoise noise = QuadraticNoise::None, double noise_std = 0.0);

/// The default instance used across tests and demos:
/// A = diag(2,4), B = I, w_target = (1,1).
QuadraticBilevel canonical_quadratic(QuadraticNoise noise = QuadraticNoise::None, double noise_std = 0.0);

/// Closed form B^T A^{-1} (A^{-1} B lam - w_target).
RealVec quadratic_exact_hypergrad(const QuadraticBilevel& problem, const RealVec& lam);

}  // namespace hypergrad
