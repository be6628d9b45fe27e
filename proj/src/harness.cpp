#include "hypergrad/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "hypergrad/parallel.hpp"

namespace hypergrad {

const std::vector<VariantSpec>& VariantSpec::builtin() {
    static const std::vector<VariantSpec> table = {
        {"Batch", 50, 50, SubAlgo::GD, SubAlgo::GD},
        {"StochConst", 50, 50, SubAlgo::SGDConst, SubAlgo::SGDConst},
        {"StochDec", 50, 50, SubAlgo::SGDDec, SubAlgo::SGDDec},
        {"StochBatch", 50, 50, SubAlgo::SGDDec, SubAlgo::GD},
        {"BatchStoch", 50, 50, SubAlgo::GD, SubAlgo::SGDDec},
        {"Batch75_25", 75, 25, SubAlgo::GD, SubAlgo::GD},
        {"StochConst75_25", 75, 25, SubAlgo::SGDConst, SubAlgo::SGDConst},
        {"StochDec75_25", 75, 25, SubAlgo::SGDDec, SubAlgo::SGDDec},
    };
    return table;
}

VariantSpec VariantSpec::by_name(const std::string& name) {
    for (const auto& v : builtin())
        if (v.name == name) return v;
    throw std::invalid_argument("unknown variant '" + name + "'");
}

std::pair<std::int64_t, std::int64_t> epoch_budget_to_iters(const VariantSpec& variant, double total_epochs,
                                                            std::int64_t n_tr, std::int64_t batch_ll,
                                                            std::int64_t batch_ls) {
    if (total_epochs <= 0.0) throw std::invalid_argument("epoch_budget_to_iters: total_epochs must be > 0");
    const std::int64_t b_ll = variant.algo_ll == SubAlgo::GD ? n_tr : batch_ll;
    const std::int64_t b_ls = variant.algo_ls == SubAlgo::GD ? n_tr : batch_ls;
    if (b_ll <= 0 || b_ls <= 0) throw std::invalid_argument("epoch_budget_to_iters: zero batch size");
    const double nt = static_cast<double>(n_tr);
    const auto t = static_cast<std::int64_t>(
        std::llround(variant.pct_ll / 100.0 * total_epochs * nt / static_cast<double>(b_ll)));
    const auto k = static_cast<std::int64_t>(
        std::llround(variant.pct_ls / 100.0 * total_epochs * nt / static_cast<double>(b_ls)));
    return {t, k};
}

RealVec reference_gradient(const Problem& problem, const RealVec& lam) {
    if (auto exact = problem.exact_hypergrad(lam)) return *exact;
    return aid_batch(problem, lam, 2000, 2000).grad;
}

StepSchedule variant_schedule(SubAlgo algo, double q) {
    switch (algo) {
        case SubAlgo::GD:
        case SubAlgo::SGDConst:
            return StepSchedule::fixed(1.0);
        case SubAlgo::SGDDec:
            return StepSchedule::decreasing(q, 0.0);  // beta = 2/(1-q^2), gamma = beta
    }
    return StepSchedule::fixed(1.0);
}

namespace {

std::vector<double> checkpoint_epochs(const BudgetSpec& budget) {
    const int n = std::max(1, budget.n_checkpoints);
    const double total = budget.total_epochs;
    const double first = total / 30.0;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    if (n == 1) {
        out.push_back(total);
        return out;
    }
    const double lo = std::log(first), hi = std::log(total);
    for (int j = 0; j < n; ++j) out.push_back(std::exp(lo + (hi - lo) * j / (n - 1)));
    out.back() = total;
    return out;
}

}  // namespace

RunRecord run_variant(const Problem& problem, const RealVec& lam, const VariantSpec& variant,
                      const BudgetSpec& budget, std::uint64_t master_seed, const RealVec* reference,
                      int run_id) {
    RealVec ref;
    if (reference) {
        ref = *reference;
    } else {
        ref = reference_gradient(problem, lam);
    }

    const double q = problem.contraction_modulus(lam);
    const StepSchedule sched_ll = variant_schedule(variant.algo_ll, q);
    const StepSchedule sched_ls = variant_schedule(variant.algo_ls, q);
    const DeterministicView det(problem);
    const Problem& prob_ll = variant.algo_ll == SubAlgo::GD ? static_cast<const Problem&>(det) : problem;

    RunRecord rec;
    rec.run_id = run_id;
    rec.variant = variant.name;
    rec.seed = master_seed;

    for (const double epoch : checkpoint_epochs(budget)) {
        const auto [t, k] = epoch_budget_to_iters(variant, epoch, budget.n_tr, budget.batch_ll, budget.batch_ls);

        // Mixed variants pin one subproblem to the deterministic map. The
        // linear-system side switches per call, so assemble manually.
        const Trajectory lower =
            solve_lower(prob_ll, lam, t, sched_ll, {derive_stream(master_seed, 0), 0});
        const Problem& prob_ls = variant.algo_ls == SubAlgo::GD ? static_cast<const Problem&>(det) : problem;
        const Trajectory lin = solve_linear(prob_ls, lower.final, lam, k, sched_ls,
                                            {derive_stream(master_seed, 1), 0});
        // fully deterministic variants also take the final Jacobian exactly
        const bool all_gd = variant.algo_ll == SubAlgo::GD && variant.algo_ls == SubAlgo::GD;
        RealVec grad = problem.upper_grad2(lower.final, lam);
        const RealVec g2 =
            all_gd ? problem.jvp2_t_mean(lower.final, lam, lin.final)
                   : problem.jvp2_t_sample(lower.final, lam, {derive_stream(master_seed, 2), 0}, lin.final);
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g2[i];

        rec.checkpoints.emplace_back(epoch, sq_dist(grad, ref));
        rec.t_final = t;
        rec.k_final = k;
    }
    return rec;
}

Curve aggregate_runs(const std::vector<RunRecord>& records) {
    if (records.empty()) throw std::invalid_argument("aggregate_runs: no records");
    const auto& first = records.front().checkpoints;
    Curve curve;
    curve.variant = records.front().variant;
    for (const auto& r : records) {
        if (r.checkpoints.size() != first.size())
            throw std::invalid_argument("aggregate_runs: misaligned checkpoints");
        for (std::size_t j = 0; j < first.size(); ++j)
            if (r.checkpoints[j].first != first[j].first)
                throw std::invalid_argument("aggregate_runs: misaligned checkpoint epochs");
    }
    const double n = static_cast<double>(records.size());
    for (std::size_t j = 0; j < first.size(); ++j) {
        double mean = 0.0;
        for (const auto& r : records) mean += r.checkpoints[j].second;
        mean /= n;
        double var = 0.0;
        for (const auto& r : records) {
            const double d = r.checkpoints[j].second - mean;
            var += d * d;
        }
        curve.epoch.push_back(first[j].first);
        curve.mean.push_back(mean);
        curve.stddev.push_back(std::sqrt(var / n));
    }
    return curve;
}

MomentReport empirical_moments(const Problem& problem, const RealVec& lam, const EstimatorConfig& config,
                               int n_replicates, std::uint64_t master_seed, const RealVec* reference,
                               int workers) {
    if (n_replicates < 2) throw std::invalid_argument("empirical_moments: need >= 2 replicates");
    RealVec ref = reference ? *reference : reference_gradient(problem, lam);

    std::vector<RealVec> grads(static_cast<std::size_t>(n_replicates));
    parallel_for(n_replicates, workers, [&](std::int64_t i) {
        const std::uint64_t seed = derive_stream(master_seed, 0xE5715A + static_cast<std::uint64_t>(i));
        if (config.deterministic) {
            grads[static_cast<std::size_t>(i)] = aid_batch(problem, lam, config.t, config.k).grad;
        } else {
            grads[static_cast<std::size_t>(i)] =
                sid_estimate(problem, lam, config.t, config.k, config.lower, config.linear, seed,
                             config.jvp_samples)
                    .grad;
        }
    });

    const double n = static_cast<double>(n_replicates);
    RealVec mean(ref.size(), 0.0);
    for (const auto& g : grads)
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += g[j];
    for (double& v : mean) v /= n;

    MomentReport rep;
    rep.n = n_replicates;
    rep.bias_sq = sq_dist(mean, ref);
    double mse_sq_sum = 0.0;
    for (const auto& g : grads) {
        const double e = sq_dist(g, ref);
        rep.mse += e;
        mse_sq_sum += e * e;
        rep.variance += sq_dist(g, mean);
    }
    rep.mse /= n;
    rep.variance /= n;
    rep.mse_std_err = std::sqrt(std::max(0.0, mse_sq_sum / n - rep.mse * rep.mse) / n);
    return rep;
}

namespace {

void write_line(std::ofstream& out, const char* fmt, auto&&... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    out << buf;
}

}  // namespace

void export_records_csv(const std::vector<RunRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export: cannot write " + path);
    out << "run_id,variant,seed,epoch,sq_error\n";
    for (const auto& r : records)
        for (const auto& [epoch, err] : r.checkpoints)
            write_line(out, "%d,%s,%llu,%.17g,%.17g\n", r.run_id, r.variant.c_str(),
                       static_cast<unsigned long long>(r.seed), epoch, err);
    if (!out) throw std::runtime_error("export: write failed for " + path);
}

void export_curves_csv(const std::vector<Curve>& curves, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export: cannot write " + path);
    out << "variant,epoch,mean,std\n";
    for (const auto& c : curves)
        for (std::size_t j = 0; j < c.epoch.size(); ++j)
            write_line(out, "%s,%.17g,%.17g,%.17g\n", c.variant.c_str(), c.epoch[j], c.mean[j], c.stddev[j]);
    if (!out) throw std::runtime_error("export: write failed for " + path);
}

}  // namespace hypergrad
