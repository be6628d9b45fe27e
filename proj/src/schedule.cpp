#include "hypergrad/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace hypergrad {

double StepSchedule::value_at(std::int64_t t) const {
    switch (kind_) {
        case Kind::Constant:
            return eta_;
        case Kind::Decreasing:
            return beta_ / (gamma_ + static_cast<double>(t));
        case Kind::TwoPhase:
            if (t < switch_iter_) return eta_;
            return beta_ / (gamma_ + static_cast<double>(t - switch_iter_));
    }
    return eta_;
}

StepSchedule StepSchedule::constant_step(double sigma2, std::optional<double> eta_override) {
    if (sigma2 < 0.0) throw std::invalid_argument("constant_step: sigma2 must be >= 0");
    const double eta_max = 1.0 / (1.0 + sigma2);
    StepSchedule s;
    s.kind_ = Kind::Constant;
    if (eta_override) {
        if (*eta_override <= 0.0 || *eta_override > eta_max)
            throw std::invalid_argument("constant_step: eta must lie in (0, 1/(1+sigma2)]");
        s.eta_ = *eta_override;
    } else {
        s.eta_ = eta_max;
    }
    return s;
}

StepSchedule StepSchedule::decreasing(double q, double sigma2, std::optional<double> beta,
                                      std::optional<double> gamma) {
    if (q < 0.0 || q >= 1.0) throw std::invalid_argument("decreasing: require 0 <= q < 1");
    if (sigma2 < 0.0) throw std::invalid_argument("decreasing: sigma2 must be >= 0");
    const double qq = 1.0 - q * q;
    const double b = beta.value_or(2.0 / qq);
    if (b <= 1.0 / qq) throw std::invalid_argument("decreasing: beta must exceed 1/(1-q^2)");
    const double g = gamma.value_or(b * (1.0 + sigma2));
    if (g < b * (1.0 + sigma2)) throw std::invalid_argument("decreasing: gamma must be >= beta(1+sigma2)");
    StepSchedule s;
    s.kind_ = Kind::Decreasing;
    s.beta_ = b;
    s.gamma_ = g;
    s.eta_ = b / g;
    return s;
}

StepSchedule StepSchedule::two_phase(double q, double sigma1, double sigma2, double mse0_estimate) {
    if (q < 0.0 || q >= 1.0) throw std::invalid_argument("two_phase: require 0 <= q < 1");
    if (sigma1 < 0.0 || sigma2 < 0.0) throw std::invalid_argument("two_phase: variances must be >= 0");
    if (mse0_estimate < 0.0) throw std::invalid_argument("two_phase: mse0 must be >= 0");
    const double eta = 1.0 / (1.0 + sigma2);
    if (sigma1 == 0.0) {
        StepSchedule s = constant_step(sigma2);
        s.note_ = "sigma1 = 0: no noise floor, constant phase only";
        return s;
    }
    const double qq = 1.0 - q * q;
    const double floor = eta * sigma1 / qq;
    // Switch once the constant-step envelope transient has decayed below the
    // floor itself, i.e. envelope <= 2 * floor.
    const double contraction = 1.0 - eta * qq;
    std::int64_t t = 0;
    double transient = mse0_estimate - floor;
    while (transient > floor && t < (std::int64_t{1} << 40)) {
        transient *= contraction;
        ++t;
    }
    StepSchedule s;
    s.kind_ = Kind::TwoPhase;
    s.eta_ = eta;
    s.beta_ = 2.0 / qq;
    s.gamma_ = s.beta_ * (1.0 + sigma2);
    s.switch_iter_ = (mse0_estimate <= floor) ? 0 : t;
    return s;
}

StepSchedule StepSchedule::fixed(double eta) {
    if (eta < 0.0) throw std::invalid_argument("fixed: eta must be >= 0");
    StepSchedule s;
    s.kind_ = Kind::Constant;
    s.eta_ = eta;
    return s;
}

std::pair<double, double> lipschitz_to_variance(double L_hatT, double q, double var_at_fixed_point) {
    if (q < 0.0 || q >= 1.0) throw std::invalid_argument("lipschitz_to_variance: require 0 <= q < 1");
    if (L_hatT < 0.0 || var_at_fixed_point < 0.0)
        throw std::invalid_argument("lipschitz_to_variance: nonnegative inputs required");
    const double sigma1 = 2.0 * var_at_fixed_point;
    const double om = 1.0 - q;
    const double sigma2 = 2.0 * (L_hatT * L_hatT + q * q) / (om * om);
    return {sigma1, sigma2};
}

}  // namespace hypergrad
