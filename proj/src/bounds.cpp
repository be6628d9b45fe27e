#include "hypergrad/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace hypergrad {
namespace bounds {

namespace {

// Refuses (1-q) denominators below this; callers get an error, not an
// inflated number.
constexpr double kMinGap = 1e-12;

double one_minus_q(double q) {
    if (q >= 1.0) throw std::invalid_argument("bounds: q must be < 1");
    if (q < 0.0) throw std::invalid_argument("bounds: q must be >= 0");
    const double gap = 1.0 - q;
    if (gap < kMinGap) throw std::invalid_argument("bounds: 1-q below 1e-12, constants not usable");
    return gap;
}

void require_nonneg(double x, const char* what) {
    if (x < 0.0 || !std::isfinite(x)) throw std::invalid_argument(std::string("bounds: ") + what + " must be finite and >= 0");
}

}  // namespace

double RateFunction::operator()(std::int64_t t) const {
    switch (kind) {
        case Kind::PowerLaw:
            return c / (gamma + static_cast<double>(t));
        case Kind::Geometric:
            return std::pow(r, static_cast<double>(t)) * (init - floor) + floor;
        case Kind::Zero:
            return 0.0;
    }
    return 0.0;
}

RateFunction RateFunction::power_law(double c, double gamma) {
    require_nonneg(c, "power-law constant");
    if (gamma <= 0.0) throw std::invalid_argument("bounds: power-law gamma must be > 0");
    RateFunction f;
    f.kind = Kind::PowerLaw;
    f.c = c;
    f.gamma = gamma;
    return f;
}

RateFunction RateFunction::geometric(double r, double floor, double init) {
    if (r < 0.0 || r >= 1.0) throw std::invalid_argument("bounds: geometric ratio must lie in [0,1)");
    require_nonneg(floor, "geometric floor");
    require_nonneg(init, "geometric init");
    RateFunction f;
    f.kind = Kind::Geometric;
    f.r = r;
    f.floor = floor;
    f.init = init;
    return f;
}

RateFunction RateFunction::zero() { return {}; }

double c1_constant(const ProblemConstants& c) {
    const double gap = one_minus_q(c.q);
    return c.mu2 + (c.mu1 * c.L_Phi + c.nu2 * c.L_E) / gap + c.nu1 * c.L_E * c.L_Phi / (gap * gap);
}

double bias_bound(const ProblemConstants& c, double rho_t, double sigma_k) {
    require_nonneg(rho_t, "rho");
    require_nonneg(sigma_k, "sigma");
    const double c1 = c1_constant(c);
    const double sr = std::sqrt(rho_t), ss = std::sqrt(sigma_k);
    return c1 * sr + c.L_Phi * ss + c.nu2 * sr * ss;
}

VarianceBounds variance_bounds(const ProblemConstants& c, double rho_t, double sigma_k) {
    require_nonneg(rho_t, "rho");
    require_nonneg(sigma_k, "sigma");
    const double gap = one_minus_q(c.q);
    const double c1 = c1_constant(c);
    VarianceBounds v;
    v.inner = 2.0 * c.m2 * c.L_E * c.L_E / (gap * gap) + 2.0 * (c.L_Phi * c.L_Phi + c.m2) * sigma_k +
              2.0 * c.nu2 * c.nu2 * rho_t * sigma_k;
    v.outer = 3.0 * (c1 * c1 * rho_t + c.L_Phi * c.L_Phi * sigma_k + c.nu2 * c.nu2 * rho_t * sigma_k);
    return v;
}

MseBound mse_bound(const ProblemConstants& c, double rho_t, double sigma_k) {
    require_nonneg(rho_t, "rho");
    require_nonneg(sigma_k, "sigma");
    const double gap = one_minus_q(c.q);
    const double c1 = c1_constant(c);
    MseBound b;
    b.floor = 2.0 * c.m2 * c.L_E * c.L_E / (gap * gap);
    b.total = b.floor + 6.0 * c1 * c1 * rho_t + 2.0 * (4.0 * c.L_Phi * c.L_Phi + c.m2) * sigma_k +
              8.0 * c.nu2 * c.nu2 * rho_t * sigma_k;
    b.indicative = c.any_estimated();
    return b;
}

double km_constant_envelope(double q, double sigma1, double eta, double mse0, std::int64_t t) {
    one_minus_q(q);
    require_nonneg(sigma1, "sigma1");
    require_nonneg(mse0, "mse0");
    if (eta <= 0.0) throw std::invalid_argument("bounds: eta must be > 0");
    const double qq = 1.0 - q * q;
    const double floor = eta * sigma1 / qq;
    return std::pow(1.0 - eta * qq, static_cast<double>(t)) * (mse0 - floor) + floor;
}

double km_decreasing_c(double q, double sigma1, double beta, double gamma, double mse0) {
    const double qq = 1.0 - q * q;
    one_minus_q(q);
    require_nonneg(sigma1, "sigma1");
    require_nonneg(mse0, "mse0");
    if (beta <= 1.0 / qq) throw std::invalid_argument("bounds: beta must exceed 1/(1-q^2)");
    if (gamma <= 0.0) throw std::invalid_argument("bounds: gamma must be > 0");
    return std::max(gamma * mse0, beta * beta * sigma1 / (beta * qq - 1.0));
}

SgdRates sgd_rates(double L, double tau, double sigma1_prime, double sigma2_prime, double eta,
                   std::optional<double> beta, SgdAlpha alpha_choice) {
    if (!(tau > 0.0) || tau > L) throw std::invalid_argument("bounds: require 0 < tau <= L");
    require_nonneg(sigma1_prime, "sigma1'");
    require_nonneg(sigma2_prime, "sigma2'");
    if (eta <= 0.0 || eta > 1.0 / (1.0 + sigma2_prime))
        throw std::invalid_argument("bounds: eta must lie in (0, 1/(1+sigma2')]");

    SgdRates r;
    if (alpha_choice == SgdAlpha::InverseL) {
        r.r1 = 1.0 - (eta * tau / L) * (2.0 - tau / L);
        r.r2 = eta * sigma1_prime / (tau * (2.0 * L - tau));
        r.beta_min = L * L / (tau * (2.0 * L - tau));
        if (beta) {
            if (*beta <= r.beta_min) throw std::invalid_argument("bounds: beta must exceed beta_min");
            r.r3 = (*beta) * (*beta) * sigma1_prime / ((*beta) * tau * (2.0 * L - tau) - L * L);
        }
    } else {
        const double lt = L + tau;
        r.r1 = 1.0 - 4.0 * eta * tau * L / (lt * lt);
        r.r2 = eta * sigma1_prime / (tau * L);
        r.beta_min = lt * lt / (4.0 * tau * L);
        if (beta) {
            if (*beta <= r.beta_min) throw std::invalid_argument("bounds: beta must exceed beta_min");
            r.r3 = 4.0 * (*beta) * (*beta) * sigma1_prime / (4.0 * (*beta) * tau * L - lt * lt);
        }
    }
    return r;
}

BottouRates bottou_rates(double L, double tau, double eta, double sigma1_prime) {
    if (!(tau > 0.0) || tau > L) throw std::invalid_argument("bounds: require 0 < tau <= L");
    require_nonneg(sigma1_prime, "sigma1'");
    if (eta <= 0.0) throw std::invalid_argument("bounds: eta must be > 0");
    return {1.0 - eta * tau / L, eta * sigma1_prime / (2.0 * tau)};
}

SubproblemRates subproblem_rate_constants(const ProblemConstants& c, double beta, double gamma,
                                          double w_lambda_norm, double grad1E_norm) {
    const double gap = one_minus_q(c.q);
    require_nonneg(w_lambda_norm, "||w(lambda)||");
    require_nonneg(grad1E_norm, "||grad1 E||");
    const double qq = 1.0 - c.q * c.q;
    SubproblemRates out;
    out.sigma_lam1 = c.sigma_lam1;
    out.sigma_lam2 = 2.0 * (c.L_PhiTilde * c.L_PhiTilde + c.q * c.q) / (gap * gap);
    if (beta <= 1.0 / qq) throw std::invalid_argument("bounds: beta must exceed 1/(1-q^2)");
    if (gamma < beta * (1.0 + out.sigma_lam2))
        throw std::invalid_argument("bounds: gamma must be >= beta(1+sigma_lam2)");
    const double denom = beta * qq - 1.0;
    out.d_w = std::max(gamma * w_lambda_norm * w_lambda_norm, beta * beta * c.sigma_lam1 / denom);
    out.d_v = (grad1E_norm * grad1E_norm) / (gap * gap) *
              std::max(gamma, 2.0 * beta * beta * c.L_PhiTilde * c.L_PhiTilde / denom);
    out.rho = RateFunction::power_law(out.d_w, gamma);
    out.sigma = RateFunction::power_law(out.d_v, gamma);
    return out;
}

}  // namespace bounds
}  // namespace hypergrad
