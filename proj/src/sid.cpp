#include "hypergrad/sid.hpp"

#include <stdexcept>
#include <utility>

namespace hypergrad {

LinearSystemMap::LinearSystemMap(const Problem& problem, RealVec w, RealVec lam)
    : problem_(problem), w_(std::move(w)), lam_(std::move(lam)), grad1_(problem.upper_grad1(w_, lam_)) {}

RealVec LinearSystemMap::psi_sample(const RealVec& v, const SampleKey& key) const {
    RealVec out = problem_.jvp1_t_sample(w_, lam_, key, v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += grad1_[i];
    return out;
}

RealVec LinearSystemMap::psi_mean(const RealVec& v) const {
    RealVec out = problem_.jvp1_t_mean(w_, lam_, v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += grad1_[i];
    return out;
}

SampledMap LinearSystemMap::as_sampled_map() const {
    return [this](const RealVec& v, const SampleKey& key) { return psi_sample(v, key); };
}

SampledMap LinearSystemMap::as_mean_map() const {
    return [this](const RealVec& v, const SampleKey&) { return psi_mean(v); };
}

Trajectory solve_lower(const Problem& problem, const RealVec& lam, std::int64_t t,
                       const StepSchedule& schedule, SampleKey stream, const RealVec* warm_start) {
    RealVec w0 = warm_start ? *warm_start : zeros(static_cast<std::size_t>(problem.dim_w()));
    SampledMap map = [&problem, &lam](const RealVec& w, const SampleKey& key) {
        return problem.phi_sample(w, lam, key);
    };
    return km_run(map, std::move(w0), schedule, t, stream);
}

Trajectory solve_linear(const Problem& problem, const RealVec& w, const RealVec& lam, std::int64_t k,
                        const StepSchedule& schedule, SampleKey stream) {
    LinearSystemMap lin(problem, w, lam);
    return km_run(lin.as_sampled_map(), zeros(static_cast<std::size_t>(problem.dim_w())), schedule, k, stream);
}

HypergradEstimate sid_estimate_with_streams(const Problem& problem, const RealVec& lam, std::int64_t t,
                                            std::int64_t k, const StepSchedule& lower_schedule,
                                            const StepSchedule& linear_schedule,
                                            std::uint64_t stream_lower, std::uint64_t stream_linear,
                                            std::uint64_t stream_final, int jvp_samples,
                                            const RealVec* warm_start) {
    if (jvp_samples < 1) throw std::invalid_argument("sid_estimate: jvp_samples must be >= 1");
    if (stream_lower == stream_linear || stream_lower == stream_final || stream_linear == stream_final)
        throw std::invalid_argument("sid_estimate: sample streams must be pairwise distinct");

    const Trajectory lower = solve_lower(problem, lam, t, lower_schedule, {stream_lower, 0}, warm_start);
    const RealVec& w_hat = lower.final;

    const Trajectory lin = solve_linear(problem, w_hat, lam, k, linear_schedule, {stream_linear, 0});
    const RealVec& v_hat = lin.final;

    HypergradEstimate est;
    est.grad = problem.upper_grad2(w_hat, lam);
    const SampleKey final_base{stream_final, 0};
    const double inv_j = 1.0 / static_cast<double>(jvp_samples);
    for (int j = 0; j < jvp_samples; ++j) {
        const RealVec g = problem.jvp2_t_sample(w_hat, lam, final_base.at(static_cast<std::uint64_t>(j)), v_hat);
        axpy(inv_j, g, est.grad);
    }
    if (!all_finite(est.grad))
        throw std::runtime_error("sid_estimate: non-finite hypergradient (t=" + std::to_string(t) +
                                 ", k=" + std::to_string(k) + ", streams " + std::to_string(stream_lower) + "/" +
                                 std::to_string(stream_linear) + "/" + std::to_string(stream_final) + ")");
    est.t = t;
    est.k = k;
    est.jvp_samples = jvp_samples;
    est.seeds = {stream_lower, stream_linear, stream_final};
    est.variant_tag = "sid";
    est.w_lower = w_hat;
    return est;
}

HypergradEstimate sid_estimate(const Problem& problem, const RealVec& lam, std::int64_t t, std::int64_t k,
                               const StepSchedule& lower_schedule, const StepSchedule& linear_schedule,
                               std::uint64_t master_seed, int jvp_samples, const RealVec* warm_start) {
    return sid_estimate_with_streams(problem, lam, t, k, lower_schedule, linear_schedule,
                                     derive_stream(master_seed, 0), derive_stream(master_seed, 1),
                                     derive_stream(master_seed, 2), jvp_samples, warm_start);
}

HypergradEstimate aid_batch(const Problem& problem, const RealVec& lam, std::int64_t t, std::int64_t k) {
    const DeterministicView det(problem);
    const StepSchedule unit = StepSchedule::fixed(1.0);
    HypergradEstimate est = sid_estimate(det, lam, t, k, unit, unit, 0, 1);
    est.variant_tag = "aid_batch";
    return est;
}

double quadratic_form_value(const Problem& problem, const RealVec& v, const RealVec& w, const RealVec& lam) {
    if (!problem.is_minimization())
        throw std::invalid_argument("quadratic_form_value: map is not a gradient step on a lower objective");
    // (alpha/2) v^T Hess v = (1/2) v^T (I - d1Phi^T) v
    const RealVec jv = problem.jvp1_t_mean(w, lam, v);
    const RealVec g1 = problem.upper_grad1(w, lam);
    return 0.5 * (dot(v, v) - dot(v, jv)) - dot(v, g1);
}

}  // namespace hypergrad
