#pragma once

#include "hypergrad/data.hpp"
#include "hypergrad/problem.hpp"

namespace hypergrad {

enum class RegMode { Single, PerFeature };

/// Per-hyperparameter step constants of the gradient-descent map at a
/// given regularization: L and tau bound the lower-objective curvature,
/// alpha = 2/(L + tau) and q = (L - tau)/(L + tau).
struct StepConstants {
    double L = 0.0;
    double tau = 0.0;
    double alpha = 0.0;
    double q = 0.0;
};

/// L2-regularized binary logistic regression as a bilevel problem.
///
/// Lower objective: sum_i psi(y_i x_i^T w) + R(w, lam) over the training
/// rows, psi(u) = log(1 + e^{-u}), y in {-1, +1}; R = (lam/2)||w||^2 or
/// (1/2) w^T diag(lam) w. The map is the optimal-step gradient descent step
/// and the sampled map replaces the data term by a sum-scaled minibatch, so
/// the lam-Jacobian is deterministic (separable problem, m2 = 0).
/// Upper objective: unregularized loss on the validation rows.
class RegLogistic final : public Problem {
public:
    RegLogistic(Dataset train, Dataset val, RegMode reg_mode, std::int64_t batch_size,
                SamplerMode sampler_mode = SamplerMode::IidWithReplacement, std::uint64_t sampler_seed = 0);

    int dim_w() const override { return static_cast<int>(train_.d); }
    int dim_lambda() const override { return reg_mode_ == RegMode::Single ? 1 : static_cast<int>(train_.d); }

    RealVec phi_mean(const RealVec& w, const RealVec& lam) const override;
    RealVec phi_sample(const RealVec& w, const RealVec& lam, const SampleKey& key) const override;
    RealVec jvp1_t_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const override;
    RealVec jvp1_t_sample(const RealVec& w, const RealVec& lam, const SampleKey& key,
                          const RealVec& v) const override;
    RealVec jvp2_t_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const override;
    double upper_value(const RealVec& w, const RealVec& lam) const override;
    RealVec upper_grad1(const RealVec& w, const RealVec& lam) const override;
    RealVec upper_grad2(const RealVec& w, const RealVec& lam) const override;
    bool is_minimization() const override { return true; }
    ProblemConstants constants(const RealVec& lam) const override;

    /// Numerical oracle: the fixed point solved to residual 1e-10.
    std::optional<RealVec> fixed_point(const RealVec& lam) const override {
        return solve_fixed_point(lam, 1e-10);
    }

    double contraction_modulus(const RealVec& lam) const override { return step_constants(lam).q; }

    StepConstants step_constants(const RealVec& lam) const;

    /// Full lower-objective gradient (data term plus regularizer).
    RealVec lower_grad(const RealVec& w, const RealVec& lam) const;
    double lower_value(const RealVec& w, const RealVec& lam) const;

    /// Deterministic fixed-point solve to ||Phi(w) - w|| <= tol.
    RealVec solve_fixed_point(const RealVec& lam, double tol, std::int64_t max_iters = 2000000) const;

    /// 0/1 accuracy of sign(x^T w), with sign(0) = +1.
    double accuracy(const RealVec& w, const Dataset& ds) const;

    const Dataset& train() const { return train_; }
    const Dataset& val() const { return val_; }
    RegMode reg_mode() const { return reg_mode_; }
    std::int64_t batch_size() const { return sampler_.batch_size(); }

private:
    RealVec reg_diag(const RealVec& lam) const;  // per-coordinate regularizer weights

    Dataset train_;
    Dataset val_;
    RegMode reg_mode_;
    MinibatchSampler sampler_;
    double gram_norm_tr_ = 0.0;   // sigma_max(X^T X) on train
    double gram_norm_val_ = 0.0;  // on validation
    double sum_norm_val_ = 0.0;   // sum of validation row norms
    double sum_norm3_tr_ = 0.0;   // sum of cubed train row norms
    double max_row_sq_tr_ = 0.0;  // max squared train row norm
};

RegLogistic logistic_problem(Dataset train, Dataset val, RegMode reg_mode, std::int64_t batch_size,
                             SamplerMode sampler_mode = SamplerMode::IidWithReplacement,
                             std::uint64_t sampler_seed = 0);

/// (L, tau, alpha, q) of the gradient-step map at lam.
StepConstants logistic_constants(const RegLogistic& problem, const RealVec& lam);

}  // namespace hypergrad
