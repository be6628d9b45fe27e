#pragma once

#include <cstdint>

#include "hypergrad/problem.hpp"

namespace hypergrad {

enum class SampledCapability { Phi, Jvp1T, Jvp2T };

struct UnbiasednessReport {
    double mean_gap = 0.0;  // || sample mean - analytic mean ||
    double mc_std = 0.0;    // Monte-Carlo std estimate of mean_gap
    int n_samples = 0;
};

/// Averages `n_samples` draws of the selected sampled capability at (w, lam)
/// and compares against the corresponding mean capability. Jacobian products
/// are probed along a fixed random direction. Throws on non-finite samples,
/// naming the offending key.
UnbiasednessReport check_unbiasedness(const Problem& problem, const RealVec& w, const RealVec& lam,
                                      int n_samples, std::uint64_t master_seed,
                                      SampledCapability capability = SampledCapability::Phi);

struct ContractionEstimate {
    double q_est = 0.0;
    bool verified = false;  // q_est < 1; otherwise "not a verified contraction"
};

/// Estimates sup_w ||d1Phi(w, lam)|| over random probe points by power
/// iteration on the Jacobian composed with its adjoint.
ContractionEstimate estimate_contraction(const Problem& problem, const RealVec& lam, int n_probe_points,
                                         int n_power_iters, std::uint64_t master_seed);

struct VarianceEstimate {
    double sigma1_hat = 0.0;  // 2 x empirical trace-variance of phi_sample
    double m2_hat = 0.0;      // empirical proxy for the d2Phi variance bound
};

VarianceEstimate estimate_variance_constants(const Problem& problem, const RealVec& lam,
                                             const RealVec& w_probe, int n_samples,
                                             std::uint64_t master_seed);

}  // namespace hypergrad
