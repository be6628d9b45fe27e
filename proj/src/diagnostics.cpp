#include "hypergrad/diagnostics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hypergrad {

namespace {

// substream indices reserved for diagnostics
constexpr std::uint64_t kUnbiasStream = 101;
constexpr std::uint64_t kProbeStream = 102;
constexpr std::uint64_t kPowerStream = 103;
constexpr std::uint64_t kVarStream = 104;

RealVec unit_probe(int dim, const SampleKey& key) {
    KeyedRng rng(key);
    RealVec v = rng.gaussian_vec(static_cast<std::size_t>(dim));
    const double n = norm2(v);
    if (n > 0) scale(v, 1.0 / n);
    return v;
}

// Welford accumulator per coordinate; exact zero variance for identical
// samples.
struct MomentAccumulator {
    explicit MomentAccumulator(std::size_t dim) : mean(dim, 0.0), m2(dim, 0.0) {}
    RealVec mean;
    RealVec m2;
    std::int64_t count = 0;

    void add(const RealVec& x) {
        ++count;
        for (std::size_t j = 0; j < mean.size(); ++j) {
            const double delta = x[j] - mean[j];
            mean[j] += delta / static_cast<double>(count);
            m2[j] += delta * (x[j] - mean[j]);
        }
    }
    double trace_variance() const {  // unbiased
        double s = 0.0;
        for (double v : m2) s += v;
        return count > 1 ? s / static_cast<double>(count - 1) : 0.0;
    }
};

}  // namespace

UnbiasednessReport check_unbiasedness(const Problem& problem, const RealVec& w, const RealVec& lam,
                                      int n_samples, std::uint64_t master_seed,
                                      SampledCapability capability) {
    if (n_samples < 2) throw std::invalid_argument("check_unbiasedness: n_samples must be >= 2");

    const SampleKey base{derive_stream(master_seed, kUnbiasStream), 0};
    const RealVec probe = unit_probe(problem.dim_w(), {derive_stream(master_seed, kProbeStream), 0});

    auto draw = [&](const SampleKey& key) -> RealVec {
        switch (capability) {
            case SampledCapability::Phi:
                return problem.phi_sample(w, lam, key);
            case SampledCapability::Jvp1T:
                return problem.jvp1_t_sample(w, lam, key, probe);
            case SampledCapability::Jvp2T:
                return problem.jvp2_t_sample(w, lam, key, probe);
        }
        return {};
    };
    RealVec mean;
    switch (capability) {
        case SampledCapability::Phi:
            mean = problem.phi_mean(w, lam);
            break;
        case SampledCapability::Jvp1T:
            mean = problem.jvp1_t_mean(w, lam, probe);
            break;
        case SampledCapability::Jvp2T:
            mean = problem.jvp2_t_mean(w, lam, probe);
            break;
    }

    MomentAccumulator acc(mean.size());
    for (int i = 0; i < n_samples; ++i) {
        const SampleKey key = base.at(static_cast<std::uint64_t>(i));
        const RealVec s = draw(key);
        if (!all_finite(s))
            throw std::runtime_error("check_unbiasedness: non-finite sample at stream " +
                                     std::to_string(key.stream_id) + " counter " + std::to_string(key.counter));
        acc.add(s);
    }

    UnbiasednessReport rep;
    rep.n_samples = n_samples;
    rep.mean_gap = std::sqrt(sq_dist(acc.mean, mean));
    rep.mc_std = std::sqrt(acc.trace_variance() / static_cast<double>(n_samples));
    return rep;
}

ContractionEstimate estimate_contraction(const Problem& problem, const RealVec& lam, int n_probe_points,
                                         int n_power_iters, std::uint64_t master_seed) {
    if (n_probe_points < 1) throw std::invalid_argument("estimate_contraction: need >= 1 probe point");
    if (n_power_iters < 1) throw std::invalid_argument("estimate_contraction: need >= 1 power iteration");

    const int d = problem.dim_w();
    KeyedRng probe_rng({derive_stream(master_seed, kProbeStream), 1});

    double q_max = 0.0;
    for (int p = 0; p < n_probe_points; ++p) {
        // first probe point is the origin, the others are gaussian
        RealVec w(static_cast<std::size_t>(d), 0.0);
        if (p > 0) w = probe_rng.gaussian_vec(static_cast<std::size_t>(d));

        RealVec v = unit_probe(d, {derive_stream(master_seed, kPowerStream), static_cast<std::uint64_t>(p)});
        double sq_norm_est = 0.0;
        for (int it = 0; it < n_power_iters; ++it) {
            // one step of power iteration on (d1Phi)^T d1Phi
            RealVec u = problem.jvp1_mean(w, lam, v);
            u = problem.jvp1_t_mean(w, lam, u);
            sq_norm_est = norm2(u);  // ||Mv|| for unit v
            if (sq_norm_est == 0.0) break;
            scale(u, 1.0 / sq_norm_est);
            v = std::move(u);
        }
        q_max = std::max(q_max, std::sqrt(sq_norm_est));
    }
    return {q_max, q_max < 1.0};
}

VarianceEstimate estimate_variance_constants(const Problem& problem, const RealVec& lam,
                                             const RealVec& w_probe, int n_samples,
                                             std::uint64_t master_seed) {
    if (n_samples < 2) throw std::invalid_argument("estimate_variance_constants: n_samples must be >= 2");
    const SampleKey base{derive_stream(master_seed, kVarStream), 0};

    MomentAccumulator phi_acc(static_cast<std::size_t>(problem.dim_w()));
    for (int i = 0; i < n_samples; ++i) {
        const RealVec s = problem.phi_sample(w_probe, lam, base.at(static_cast<std::uint64_t>(i)));
        if (!all_finite(s)) throw std::runtime_error("estimate_variance_constants: non-finite sample");
        phi_acc.add(s);
    }

    // d2Phi variance probed along random unit directions; lower-bound proxy
    // for the spectral-variance constant, reported as estimated
    constexpr int kProbes = 8;
    double m2 = 0.0;
    for (int r = 0; r < kProbes; ++r) {
        const RealVec v = unit_probe(
            problem.dim_w(), {derive_stream(master_seed, kProbeStream), 100 + static_cast<std::uint64_t>(r)});
        MomentAccumulator acc(static_cast<std::size_t>(problem.dim_lambda()));
        for (int i = 0; i < n_samples; ++i)
            acc.add(problem.jvp2_t_sample(w_probe, lam, base.at(static_cast<std::uint64_t>(1000000 + i)), v));
        m2 = std::max(m2, acc.trace_variance());
    }
    return {2.0 * phi_acc.trace_variance(), m2};
}

}  // namespace hypergrad
