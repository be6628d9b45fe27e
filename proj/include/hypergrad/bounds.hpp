#pragma once

#include <cstdint>
#include <optional>

#include "hypergrad/constants.hpp"

namespace hypergrad {
namespace bounds {

/// Convergence-rate function for a subproblem solver.
struct RateFunction {
    enum class Kind { PowerLaw, Geometric, Zero };
    Kind kind = Kind::Zero;
    // PowerLaw: c/(gamma + t)
    double c = 0.0;
    double gamma = 0.0;
    // Geometric: r^t (init - floor) + floor
    double r = 0.0;
    double floor = 0.0;
    double init = 0.0;

    double operator()(std::int64_t t) const;

    static RateFunction power_law(double c, double gamma);
    static RateFunction geometric(double r, double floor, double init);
    static RateFunction zero();
};

/// c1 = mu2 + (mu1 L_Phi + nu2 L_E)/(1-q) + nu1 L_E L_Phi/(1-q)^2.
double c1_constant(const ProblemConstants& c);

/// Bias bound c1 sqrt(rho) + L_Phi sqrt(sigma) + nu2 sqrt(rho) sqrt(sigma).
double bias_bound(const ProblemConstants& c, double rho_t, double sigma_k);

struct VarianceBounds {
    double inner = 0.0;  // expected conditional variance component
    double outer = 0.0;  // variance of the conditional mean component
};

/// inner = 2 m2 L_E^2/(1-q)^2 + 2(L_Phi^2 + m2) sigma + 2 nu2^2 rho sigma
/// outer = 3 (c1^2 rho + L_Phi^2 sigma + nu2^2 rho sigma)
VarianceBounds variance_bounds(const ProblemConstants& c, double rho_t, double sigma_k);

struct MseBound {
    double total = 0.0;
    double floor = 0.0;        // 2 m2 L_E^2/(1-q)^2, the irreducible part
    bool indicative = false;   // true when any input constant was estimated
};

/// total = floor + 6 c1^2 rho + 2(4 L_Phi^2 + m2) sigma + 8 nu2^2 rho sigma
MseBound mse_bound(const ProblemConstants& c, double rho_t, double sigma_k);

/// Constant-step MSE envelope
/// (1 - eta(1-q^2))^t (mse0 - eta sigma1/(1-q^2)) + eta sigma1/(1-q^2).
double km_constant_envelope(double q, double sigma1, double eta, double mse0, std::int64_t t);

/// Decreasing-step envelope constant
/// c = max{gamma mse0, beta^2 sigma1/(beta(1-q^2) - 1)}; envelope c/(gamma+t).
double km_decreasing_c(double q, double sigma1, double beta, double gamma, double mse0);

enum class SgdAlpha { InverseL, TwoOverLPlusTau };

struct SgdRates {
    double r1 = 0.0;        // constant-step contraction factor
    double r2 = 0.0;        // constant-step noise floor
    double beta_min = 0.0;  // admissibility threshold for decreasing steps
    std::optional<double> r3;  // decreasing-step constant, when beta given
};

/// Rates of SGD on a tau-strongly convex, L-smooth objective viewed as a
/// stochastic fixed-point iteration, for the two canonical inner step sizes.
SgdRates sgd_rates(double L, double tau, double sigma1_prime, double sigma2_prime, double eta,
                   std::optional<double> beta, SgdAlpha alpha_choice);

struct BottouRates {
    double r1 = 0.0;
    double r2 = 0.0;
};

/// Classical comparison rates r1 = 1 - eta tau/L, r2 = eta sigma1'/(2 tau).
BottouRates bottou_rates(double L, double tau, double eta, double sigma1_prime);

struct SubproblemRates {
    double d_w = 0.0;
    double d_v = 0.0;
    double sigma_lam1 = 0.0;
    double sigma_lam2 = 0.0;
    RateFunction rho;    // PowerLaw(d_w, gamma)
    RateFunction sigma;  // PowerLaw(d_v, gamma)
};

/// Rate constants for the two subproblem solvers under the decreasing
/// schedule beta/(gamma + t):
///   sigma_lam2 = 2 (L_PhiTilde^2 + q^2)/(1-q)^2
///   d_w = max{gamma ||w(lam)||^2, beta^2 sigma_lam1/(beta(1-q^2) - 1)}
///   d_v = ||grad1_E||^2/(1-q)^2 max{gamma, 2 beta^2 L_PhiTilde^2/(beta(1-q^2) - 1)}
/// Requires beta > 1/(1-q^2) and gamma >= beta(1 + sigma_lam2).
SubproblemRates subproblem_rate_constants(const ProblemConstants& c, double beta, double gamma,
                                          double w_lambda_norm, double grad1E_norm);

}  // namespace bounds
}  // namespace hypergrad
