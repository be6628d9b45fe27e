#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "hypergrad/km.hpp"
#include "hypergrad/problem.hpp"

namespace hypergrad {

/// An estimated hypergradient together with its provenance: subproblem
/// iteration counts, the number of final Jacobian samples averaged, the
/// three stream ids consumed, a variant label, and the cost in epochs
/// (filled in by the experiment harness).
struct HypergradEstimate {
    RealVec grad;
    std::int64_t t = 0;
    std::int64_t k = 0;
    int jvp_samples = 1;
    std::array<std::uint64_t, 3> seeds{};  // lower-level, linear-system, final-sample streams
    std::string variant_tag;
    double epoch_cost = 0.0;
    RealVec w_lower;  // final lower-level iterate (warm starts, metrics)
};

/// Affine map v -> d1Phi(w, lam)^T v + grad1_E(w, lam), whose fixed point is
/// the solution of the implicit linear system at the base point. The upper
/// gradient is cached at construction; the base problem must outlive the map.
class LinearSystemMap {
public:
    LinearSystemMap(const Problem& problem, RealVec w, RealVec lam);

    RealVec psi_sample(const RealVec& v, const SampleKey& key) const;
    RealVec psi_mean(const RealVec& v) const;

    const RealVec& grad1_upper() const { return grad1_; }
    SampledMap as_sampled_map() const;
    SampledMap as_mean_map() const;

private:
    const Problem& problem_;
    RealVec w_;
    RealVec lam_;
    RealVec grad1_;
};

/// Runs the stochastic fixed-point iteration on the lower-level map from
/// w0 = 0 (or `warm_start` when given).
Trajectory solve_lower(const Problem& problem, const RealVec& lam, std::int64_t t,
                       const StepSchedule& schedule, SampleKey stream, const RealVec* warm_start = nullptr);

/// Runs the stochastic fixed-point iteration on the linear-system map at
/// base point w, from v0 = 0.
Trajectory solve_linear(const Problem& problem, const RealVec& w, const RealVec& lam, std::int64_t k,
                        const StepSchedule& schedule, SampleKey stream);

/// Stochastic implicit differentiation: t lower-level steps, k linear-system
/// steps at the resulting iterate, then
///   grad = grad2_E(w_t, lam) + (1/J) sum_j d2Phi_sample(w_t, lam, key_j)^T v_k
/// with the three sample streams pairwise independent.
HypergradEstimate sid_estimate(const Problem& problem, const RealVec& lam, std::int64_t t, std::int64_t k,
                               const StepSchedule& lower_schedule, const StepSchedule& linear_schedule,
                               std::uint64_t master_seed, int jvp_samples = 1,
                               const RealVec* warm_start = nullptr);

/// As sid_estimate but with explicit stream ids (stream separation tests,
/// custom seeding). The three streams must be pairwise distinct.
HypergradEstimate sid_estimate_with_streams(const Problem& problem, const RealVec& lam, std::int64_t t,
                                            std::int64_t k, const StepSchedule& lower_schedule,
                                            const StepSchedule& linear_schedule,
                                            std::uint64_t stream_lower, std::uint64_t stream_linear,
                                            std::uint64_t stream_final, int jvp_samples = 1,
                                            const RealVec* warm_start = nullptr);

/// Deterministic reference: the same pipeline driven by the mean
/// capabilities with step size 1. Bit-identical to sid_estimate on a
/// problem whose samplers have zero variance.
HypergradEstimate aid_batch(const Problem& problem, const RealVec& lam, std::int64_t t, std::int64_t k);

/// Diagnostic value of the strongly convex quadratic underlying the linear
/// system, g(v) = (1/2) v^T (I - d1Phi^T) v - v^T grad1_E, for problems
/// whose map is a gradient step on the lower objective. Minimized by the
/// linear-system solution with value -(1/2) v*^T grad1_E.
double quadratic_form_value(const Problem& problem, const RealVec& v, const RealVec& w, const RealVec& lam);

}  // namespace hypergrad
