#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hypergrad/data.hpp"
#include "hypergrad/harness.hpp"

namespace hypergrad {

/// Constraint set for the hyperparameters with an idempotent projection.
struct HyperDomain {
    enum class Kind { Box, PositiveOrthant, Unconstrained };
    Kind kind = Kind::Unconstrained;
    RealVec lower;
    RealVec upper;
    double lambda_min = 0.0;

    RealVec project(RealVec lam) const;
    bool contains(const RealVec& lam) const;

    static HyperDomain box(RealVec lower, RealVec upper);
    static HyperDomain positive_orthant(double lambda_min = 0.0);
    static HyperDomain unconstrained();
};

struct OuterStep {
    RealVec lambda;
    double f_estimate = 0.0;  // upper objective at the approximate lower solution
    std::optional<double> val_loss;  // exact evaluation, when requested
    std::optional<double> test_accuracy;
    double epochs_spent = 0.0;
};

struct OuterTrace {
    std::vector<OuterStep> steps;
};

struct OuterConfig {
    int steps = 100;
    double lr = 0.1;
    EstimatorConfig estimator;
    bool warm_start = true;
    bool use_oracle = false;  // exact_hypergrad instead of the estimator
    bool log_space = false;   // multiplicative updates on positive lambda
    double epoch_cost_per_step = 0.0;
    int eval_every = 0;  // 0: never; otherwise exact metrics every so many steps
    const Dataset* test_set = nullptr;
};

/// Projected SGD on the hyperparameters driven by estimated hypergradients.
/// With warm_start the lower-level solver starts from the previous
/// approximate solution instead of zero (the first step always starts at
/// zero, so toggling warm_start cannot change step 0).
OuterTrace outer_sgd(const Problem& problem, RealVec lambda0, const HyperDomain& domain,
                     const OuterConfig& config, std::uint64_t master_seed);

struct EvalReport {
    double val_loss = 0.0;
    std::optional<double> accuracy;
};

/// Solves the lower level deterministically to 1e-10 and evaluates the
/// upper objective; adds 0/1 accuracy when the problem is a classifier and
/// an evaluation set is supplied.
EvalReport evaluate(const Problem& problem, const RealVec& lam, const Dataset* eval_set = nullptr);

}  // namespace hypergrad
