#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypergrad/bounds.hpp"
#include "hypergrad/sid.hpp"

namespace hypergrad {

enum class SubAlgo { GD, SGDConst, SGDDec };

/// One experiment variant: how many epochs go to each subproblem and which
/// solver runs on it. The built-in table covers the pure strategies, the
/// mixed ones, and the 75/25 budget splits.
struct VariantSpec {
    std::string name;
    int pct_ll = 50;
    int pct_ls = 50;
    SubAlgo algo_ll = SubAlgo::GD;
    SubAlgo algo_ls = SubAlgo::GD;

    static const std::vector<VariantSpec>& builtin();
    static VariantSpec by_name(const std::string& name);
};

/// Epoch accounting for a variant. GD subproblems run full-batch, one
/// iteration per epoch; stochastic ones consume n_tr/batch iterations per
/// epoch.
struct BudgetSpec {
    double total_epochs = 60.0;
    int n_checkpoints = 20;  // logarithmically spaced
    std::int64_t n_tr = 1;
    std::int64_t batch_ll = 1;
    std::int64_t batch_ls = 1;
};

std::pair<std::int64_t, std::int64_t> epoch_budget_to_iters(const VariantSpec& variant, double total_epochs,
                                                            std::int64_t n_tr, std::int64_t batch_ll,
                                                            std::int64_t batch_ls);

/// The exact hypergradient when the problem has one, otherwise the
/// deterministic pipeline with t = k = 2000.
RealVec reference_gradient(const Problem& problem, const RealVec& lam);

/// One checkpointed error trajectory: (epoch, squared error) pairs.
struct RunRecord {
    int run_id = 0;
    std::string variant;
    std::uint64_t seed = 0;
    std::vector<std::pair<double, double>> checkpoints;
    std::int64_t t_final = 0;
    std::int64_t k_final = 0;
};

/// Runs one variant at every checkpoint budget. Each checkpoint re-runs the
/// estimator from scratch at the iteration counts affordable within that
/// epoch budget, re-seeded from the stored master seed, so records are
/// deterministic and checkpoints are honest estimates for their budgets.
RunRecord run_variant(const Problem& problem, const RealVec& lam, const VariantSpec& variant,
                      const BudgetSpec& budget, std::uint64_t master_seed,
                      const RealVec* reference = nullptr, int run_id = 0);

struct Curve {
    std::string variant;
    std::vector<double> epoch;
    std::vector<double> mean;
    std::vector<double> stddev;  // population std over runs
};

Curve aggregate_runs(const std::vector<RunRecord>& records);

/// Estimator settings for replicate studies and the outer loop.
struct EstimatorConfig {
    std::int64_t t = 100;
    std::int64_t k = 100;
    StepSchedule lower = StepSchedule::fixed(1.0);
    StepSchedule linear = StepSchedule::fixed(1.0);
    int jvp_samples = 1;
    bool deterministic = false;  // run the mean pipeline instead
};

struct MomentReport {
    double mse = 0.0;
    double bias_sq = 0.0;
    double variance = 0.0;
    double mse_std_err = 0.0;  // Monte-Carlo std of the mse estimate
    int n = 0;
};

/// Replicates the estimator n times under independent master seeds and
/// decomposes the error against the reference gradient. The empirical
/// identity mse = bias_sq + variance holds exactly.
MomentReport empirical_moments(const Problem& problem, const RealVec& lam, const EstimatorConfig& config,
                               int n_replicates, std::uint64_t master_seed,
                               const RealVec* reference = nullptr, int workers = 1);

/// CSV export, full double precision, deterministic row order.
void export_records_csv(const std::vector<RunRecord>& records, const std::string& path);
void export_curves_csv(const std::vector<Curve>& curves, const std::string& path);

/// Schedules used by a variant's subproblem solver on a given problem:
/// eta = 1 for GD and SGD-const (the admissible maximum with sigma2 = 0),
/// beta/(beta + t) with beta = 2/(1-q^2) for SGD-dec.
StepSchedule variant_schedule(SubAlgo algo, double q);

}  // namespace hypergrad
