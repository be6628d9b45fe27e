#include "hypergrad/problems/toy_contraction.hpp"

#include <stdexcept>

namespace hypergrad {

ToyContraction::ToyContraction(double q, RealVec shift, double noise_std)
    : q_(q), shift_(std::move(shift)), noise_std_(noise_std) {
    if (q < 0.0 || q >= 1.0) throw std::invalid_argument("toy_contraction: require 0 <= q < 1");
    if (noise_std < 0.0) throw std::invalid_argument("toy_contraction: noise std must be >= 0");
    if (shift_.empty()) throw std::invalid_argument("toy_contraction: empty shift");
}

RealVec ToyContraction::phi_mean(const RealVec& w, const RealVec&) const {
    RealVec out(shift_);
    axpy(q_, w, out);
    return out;
}

RealVec ToyContraction::phi_sample(const RealVec& w, const RealVec& lam, const SampleKey& key) const {
    RealVec out = phi_mean(w, lam);
    if (noise_std_ > 0.0) {
        KeyedRng rng(key);
        for (double& v : out) v += noise_std_ * rng.gaussian();
    }
    return out;
}

RealVec ToyContraction::jvp1_t_mean(const RealVec&, const RealVec&, const RealVec& v) const {
    RealVec out(v);
    scale(out, q_);
    return out;
}

RealVec ToyContraction::jvp2_t_mean(const RealVec&, const RealVec&, const RealVec&) const { return {}; }

double ToyContraction::upper_value(const RealVec& w, const RealVec&) const { return 0.5 * dot(w, w); }

RealVec ToyContraction::upper_grad1(const RealVec& w, const RealVec&) const { return w; }

RealVec ToyContraction::upper_grad2(const RealVec&, const RealVec&) const { return {}; }

std::optional<RealVec> ToyContraction::fixed_point(const RealVec&) const {
    RealVec out(shift_);
    scale(out, 1.0 / (1.0 - q_));
    return out;
}

ProblemConstants ToyContraction::constants(const RealVec&) const {
    ProblemConstants c;
    c.q = q_;
    c.L_PhiTilde = q_;  // noise shift has zero w-derivative
    const double d = static_cast<double>(shift_.size());
    const double var = d * noise_std_ * noise_std_;
    c.sigma_lam1 = 2.0 * var;
    c.sigma1_lower = 2.0 * var;
    c.sigma2_lower = 0.0;  // variance does not depend on w
    c.mu1 = 1.0;
    return c;
}

ToyContraction toy_contraction(double q, RealVec shift, double noise_std) {
    return {q, std::move(shift), noise_std};
}

}  // namespace hypergrad
