#pragma once

#include "hypergrad/problem.hpp"

namespace hypergrad {

/// T(w) = q w + c with fixed point c/(1-q); the sampled map adds i.i.d.
/// Gaussian noise of std `noise_std` per coordinate. The hyperparameter is
/// empty and the upper objective is ||w||^2/2, so the type doubles as a test
/// fixture for the fixed-point solver theory.
class ToyContraction final : public Problem {
public:
    ToyContraction(double q, RealVec shift, double noise_std);

    int dim_w() const override { return static_cast<int>(shift_.size()); }
    int dim_lambda() const override { return 0; }

    RealVec phi_mean(const RealVec& w, const RealVec& lam) const override;
    RealVec phi_sample(const RealVec& w, const RealVec& lam, const SampleKey& key) const override;
    RealVec jvp1_t_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const override;
    RealVec jvp2_t_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const override;
    double upper_value(const RealVec& w, const RealVec& lam) const override;
    RealVec upper_grad1(const RealVec& w, const RealVec& lam) const override;
    RealVec upper_grad2(const RealVec& w, const RealVec& lam) const override;
    std::optional<RealVec> fixed_point(const RealVec& lam) const override;
    ProblemConstants constants(const RealVec& lam) const override;
    double contraction_modulus(const RealVec&) const override { return q_; }

    double q() const { return q_; }
    double noise_std() const { return noise_std_; }

private:
    double q_;
    RealVec shift_;
    double noise_std_;
};

ToyContraction toy_contraction(double q, RealVec shift, double noise_std);

}  // namespace hypergrad
