#pragma once

#include <memory>
#include <optional>

#include "hypergrad/constants.hpp"
#include "hypergrad/linalg.hpp"
#include "hypergrad/rng.hpp"

namespace hypergrad {

/// A bilevel problem whose lower level is the fixed point of a contraction.
///
/// The mean map phi_mean(., lambda) must be a contraction; phi_sample is an
/// unbiased estimator of it, addressed by a SampleKey so that draws are
/// reproducible and independent across keys. Jacobians are never
/// materialized: only transpose-vector products are exposed, sampled and
/// mean. Instances are immutable after construction and safe for concurrent
/// read-only use; all iteration state lives with the caller.
class Problem {
public:
    virtual ~Problem() = default;

    virtual int dim_w() const = 0;
    virtual int dim_lambda() const = 0;

    virtual RealVec phi_mean(const RealVec& w, const RealVec& lam) const = 0;
    virtual RealVec phi_sample(const RealVec& w, const RealVec& lam, const SampleKey& key) const {
        (void)key;
        return phi_mean(w, lam);
    }

    /// d1Phi(w, lam)^T v
    virtual RealVec jvp1_t_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const = 0;
    virtual RealVec jvp1_t_sample(const RealVec& w, const RealVec& lam, const SampleKey& key,
                                  const RealVec& v) const {
        (void)key;
        return jvp1_t_mean(w, lam, v);
    }

    /// d1Phi(w, lam) v. Default assumes a symmetric w-Jacobian (true for all
    /// built-in problems, whose maps are gradient steps); override otherwise.
    virtual RealVec jvp1_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const {
        return jvp1_t_mean(w, lam, v);
    }

    /// d2Phi(w, lam)^T v, in R^m
    virtual RealVec jvp2_t_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const = 0;
    virtual RealVec jvp2_t_sample(const RealVec& w, const RealVec& lam, const SampleKey& key,
                                  const RealVec& v) const {
        (void)key;
        return jvp2_t_mean(w, lam, v);
    }

    virtual double upper_value(const RealVec& w, const RealVec& lam) const = 0;
    virtual RealVec upper_grad1(const RealVec& w, const RealVec& lam) const = 0;
    virtual RealVec upper_grad2(const RealVec& w, const RealVec& lam) const = 0;

    /// Closed-form oracles, when the problem has them.
    virtual std::optional<RealVec> fixed_point(const RealVec& lam) const {
        (void)lam;
        return std::nullopt;
    }
    virtual std::optional<RealVec> exact_hypergrad(const RealVec& lam) const {
        (void)lam;
        return std::nullopt;
    }

    /// True when the map is a gradient-descent step on a strongly convex
    /// lower objective (enables the quadratic-form diagnostic).
    virtual bool is_minimization() const { return false; }

    virtual ProblemConstants constants(const RealVec& lam) const = 0;

    /// Contraction modulus alone. constants() may be expensive (some fields
    /// need the fixed point); schedule construction should use this.
    virtual double contraction_modulus(const RealVec& lam) const { return constants(lam).q; }
};

/// View of a problem with all sampled capabilities pinned to their means.
/// Used by the deterministic reference pipeline so that it shares every
/// instruction with the stochastic one.
class DeterministicView final : public Problem {
public:
    explicit DeterministicView(const Problem& base) : base_(base) {}

    int dim_w() const override { return base_.dim_w(); }
    int dim_lambda() const override { return base_.dim_lambda(); }
    RealVec phi_mean(const RealVec& w, const RealVec& lam) const override { return base_.phi_mean(w, lam); }
    RealVec jvp1_t_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const override {
        return base_.jvp1_t_mean(w, lam, v);
    }
    RealVec jvp1_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const override {
        return base_.jvp1_mean(w, lam, v);
    }
    RealVec jvp2_t_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const override {
        return base_.jvp2_t_mean(w, lam, v);
    }
    double upper_value(const RealVec& w, const RealVec& lam) const override { return base_.upper_value(w, lam); }
    RealVec upper_grad1(const RealVec& w, const RealVec& lam) const override { return base_.upper_grad1(w, lam); }
    RealVec upper_grad2(const RealVec& w, const RealVec& lam) const override { return base_.upper_grad2(w, lam); }
    std::optional<RealVec> fixed_point(const RealVec& lam) const override { return base_.fixed_point(lam); }
    std::optional<RealVec> exact_hypergrad(const RealVec& lam) const override { return base_.exact_hypergrad(lam); }
    bool is_minimization() const override { return base_.is_minimization(); }
    ProblemConstants constants(const RealVec& lam) const override { return base_.constants(lam); }
    double contraction_modulus(const RealVec& lam) const override { return base_.contraction_modulus(lam); }

private:
    const Problem& base_;
};

}  // namespace hypergrad
