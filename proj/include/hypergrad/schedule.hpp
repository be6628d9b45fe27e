#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

namespace hypergrad {

/// Step-size rule eta_t for the stochastic fixed-point iteration.
///
/// Constant:   eta_t = eta, admissible when eta <= 1/(1+sigma2).
/// Decreasing: eta_t = beta/(gamma + t), admissible when beta > 1/(1-q^2)
///             and gamma >= beta(1+sigma2); defaults beta = 2/(1-q^2),
///             gamma = beta(1+sigma2).
/// TwoPhase:   constant eta = 1/(1+sigma2) until the constant-step MSE
///             envelope decays to the noise floor, then decreasing with the
///             iteration re-indexed from the switch.
class StepSchedule {
public:
    enum class Kind { Constant, Decreasing, TwoPhase };

    double value_at(std::int64_t t) const;

    Kind kind() const { return kind_; }
    double eta() const { return eta_; }
    double beta() const { return beta_; }
    double gamma() const { return gamma_; }
    std::int64_t switch_iter() const { return switch_iter_; }
    const std::string& note() const { return note_; }

    /// Constant step eta = 1/(1+sigma2), or the override when admissible.
    static StepSchedule constant_step(double sigma2, std::optional<double> eta_override = std::nullopt);

    /// Decreasing steps beta/(gamma + t) with admissibility checks.
    static StepSchedule decreasing(double q, double sigma2, std::optional<double> beta = std::nullopt,
                                   std::optional<double> gamma = std::nullopt);

    /// Constant phase until the MSE envelope reaches the noise floor, then
    /// decreasing. With sigma1 = 0 there is no floor and the result is the
    /// plain constant schedule (note set).
    static StepSchedule two_phase(double q, double sigma1, double sigma2, double mse0_estimate);

    /// Unchecked constant step (eta >= 0). For deterministic eta = 1 runs and
    /// for degenerate cases the admissibility machinery does not cover.
    static StepSchedule fixed(double eta);

private:
    Kind kind_ = Kind::Constant;
    double eta_ = 1.0;
    double beta_ = 0.0;
    double gamma_ = 0.0;
    std::int64_t switch_iter_ = 0;
    std::string note_;
};

/// Converts a per-sample Lipschitz constant of the sampled map plus its
/// variance at the fixed point into the (sigma1, sigma2) variance model:
/// sigma1 = 2 var, sigma2 = 2(L^2 + q^2)/(1-q)^2.
std::pair<double, double> lipschitz_to_variance(double L_hatT, double q, double var_at_fixed_point);

}  // namespace hypergrad
