#pragma once

#include "hypergrad/data.hpp"
#include "hypergrad/problem.hpp"
#include "hypergrad/problems/logistic.hpp"

namespace hypergrad {

/// Multinomial (softmax) logistic regression as a bilevel problem. The
/// parameter is a c x d matrix flattened class-major; labels lie in
/// 0..n_classes-1. Cross-entropy data term plus the same two regularizer
/// shapes as the binary problem (PerFeature penalizes feature columns).
/// Hessian-vector products use the softmax identity
/// H u = p (u - p^T u) per example, and the problem is separable in lam.
class MultinomialLogistic final : public Problem {
public:
    MultinomialLogistic(Dataset train, Dataset val, int n_classes, RegMode reg_mode,
                        std::int64_t batch_size, SamplerMode sampler_mode = SamplerMode::IidWithReplacement,
                        std::uint64_t sampler_seed = 0);

    int dim_w() const override { return static_cast<int>(n_classes_ * train_.d); }
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

    std::optional<RealVec> fixed_point(const RealVec& lam) const override {
        return solve_fixed_point(lam, 1e-10);
    }

    double contraction_modulus(const RealVec& lam) const override { return step_constants(lam).q; }

    StepConstants step_constants(const RealVec& lam) const;
    RealVec lower_grad(const RealVec& w, const RealVec& lam) const;
    RealVec solve_fixed_point(const RealVec& lam, double tol, std::int64_t max_iters = 2000000) const;
    double accuracy(const RealVec& w, const Dataset& ds) const;

    int n_classes() const { return n_classes_; }
    const Dataset& train() const { return train_; }
    const Dataset& val() const { return val_; }

private:
    RealVec reg_weights(const RealVec& lam) const;  // length d
    // gradient of the data term over rows `idx` of `ds`, scaled by `scale`
    void add_data_grad(const Dataset& ds, const std::int64_t* idx, std::int64_t count, double scale,
                       const RealVec& w, RealVec& out) const;
    void add_data_hvp(const Dataset& ds, const std::int64_t* idx, std::int64_t count, double scale,
                      const RealVec& w, const RealVec& v, RealVec& out) const;

    Dataset train_;
    Dataset val_;
    int n_classes_;
    RegMode reg_mode_;
    MinibatchSampler sampler_;
    double gram_norm_tr_ = 0.0;
    double gram_norm_val_ = 0.0;
    double sum_norm_val_ = 0.0;
    double sum_norm3_tr_ = 0.0;
    double max_row_sq_tr_ = 0.0;
};

MultinomialLogistic multinomial_problem(Dataset train, Dataset val, int n_classes, RegMode reg_mode,
                                        std::int64_t batch_size,
                                        SamplerMode sampler_mode = SamplerMode::IidWithReplacement,
                                        std::uint64_t sampler_seed = 0);

}  // namespace hypergrad
