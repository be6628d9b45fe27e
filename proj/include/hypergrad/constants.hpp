#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hypergrad {

/// Constant table of a problem at a fixed hyperparameter.
///
/// q           contraction modulus of the mean map, in [0, 1)
/// L_E         Lipschitz constant of the upper objective in w
/// nu1, nu2    Lipschitz constants of the two partial Jacobians of the map
/// mu1, mu2    Lipschitz constants of the two partial upper gradients
/// L_Phi       norm of the hyperparameter Jacobian at the fixed point
/// L_PhiTilde  per-sample bound on the norm of the w-Jacobian of the sampled map
/// m2          bound on the variance of the hyperparameter Jacobian of the sampled map
/// sigma1_lower, sigma2_lower   variance-model constants of the lower-level map
/// sigma_lam1, sigma_lam2       subproblem variance constants (twice the map
///                              variance at the fixed point; Lipschitz conversion)
///
/// Each field is either analytic (exact for the problem instance) or
/// estimated (Monte Carlo / power-iteration output); bound evaluations
/// propagate the distinction so reports can flag indicative numbers.
struct ProblemConstants {
    double q = 0.0;
    double L_E = 0.0;
    double nu1 = 0.0;
    double nu2 = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    double L_Phi = 0.0;
    double L_PhiTilde = 0.0;
    double m2 = 0.0;
    double sigma1_lower = 0.0;
    double sigma2_lower = 0.0;
    double sigma_lam1 = 0.0;
    double sigma_lam2 = 0.0;

    /// Names of fields whose values are estimates rather than analytic.
    std::vector<std::string> estimated_fields;

    bool any_estimated() const { return !estimated_fields.empty(); }
    void mark_estimated(std::string name) { estimated_fields.push_back(std::move(name)); }
};

}  // namespace hypergrad
