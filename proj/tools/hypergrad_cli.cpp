// Command-line driver: config-driven hypergradient experiments, bilevel
// optimization runs, bound tables, and dataset conversion.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration/usage error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "hypergrad/bounds.hpp"
#include "hypergrad/config.hpp"
#include "hypergrad/data.hpp"
#include "hypergrad/harness.hpp"
#include "hypergrad/outer.hpp"
#include "hypergrad/parallel.hpp"
#include "hypergrad/problems/logistic.hpp"
#include "hypergrad/problems/multinomial.hpp"
#include "hypergrad/problems/quadratic_bilevel.hpp"
#include "hypergrad/problems/toy_contraction.hpp"

namespace fs = std::filesystem;
using namespace hypergrad;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    std::optional<std::int64_t> seed;
    int workers = 1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "configuration file")->required();
    cmd->add_option("--out", flags.out_dir, "output directory (overrides [output] dir)");
    cmd->add_option("--set", flags.overrides, "override as section.key=value")->take_all();
    cmd->add_option("--seed", flags.seed, "master seed (overrides [seeds] master)");
    cmd->add_option("--workers", flags.workers, "worker threads for replicates");
}

ConfigFile load_config(const CommonFlags& flags) {
    ConfigFile cfg = ConfigFile::parse_file(flags.config_path);
    for (const auto& ov : flags.overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + ov + "'");
        cfg.set_override(ov.substr(0, eq), ov.substr(eq + 1));
    }
    if (flags.seed) cfg.set_override("seeds.master", std::to_string(*flags.seed));
    if (!flags.out_dir.empty()) cfg.set_override("output.dir", flags.out_dir);
    return cfg;
}

fs::path resolve_out_dir(const ConfigFile& cfg) {
    std::string dir = cfg.get_string_or("output", "dir", "");
    if (dir.empty()) {
        if (const char* env = std::getenv("HYPERGRAD_OUT")) dir = env;
    }
    if (dir.empty()) dir = "out";
    fs::create_directories(dir);
    return dir;
}

struct BuiltProblem {
    std::unique_ptr<Problem> problem;
    std::int64_t n_tr = 1;
    std::int64_t default_batch = 1;
    std::optional<Dataset> test_set;
};

Dataset load_dataset(const ConfigFile& cfg) {
    const std::string format = cfg.get_string_or("problem", "format", "csv");
    if (!cfg.has("problem", "dataset")) throw ConfigError("config: [problem] dataset path is required");
    const std::string path = cfg.get_string("problem", "dataset");
    if (!fs::exists(path)) throw ConfigError("config: dataset file not found: " + path);
    if (format == "idx") {
        if (!cfg.has("problem", "labels")) throw ConfigError("config: [problem] labels path required for idx");
        const std::string labels = cfg.get_string("problem", "labels");
        if (!fs::exists(labels)) throw ConfigError("config: labels file not found: " + labels);
        return load_idx(path, labels);
    }
    if (format == "libsvm") return load_libsvm(path);
    if (format == "csv") return load_csv(path);
    throw ConfigError("config: unknown dataset format '" + format + "'");
}

BuiltProblem build_problem(const ConfigFile& cfg, std::uint64_t master_seed) {
    cfg.require_known_keys("problem", {"kind", "noise", "noise_std", "a_diag", "w_target", "q", "shift",
                                       "dataset", "format", "labels", "binarize", "classes", "n_tr", "n_val",
                                       "split_seed", "reg", "batch_size", "sampler"});
    const std::string kind = cfg.get_string("problem", "kind");
    BuiltProblem out;

    if (kind == "quadratic") {
        const auto diag = cfg.has("problem", "a_diag") ? cfg.get_double_list("problem", "a_diag")
                                                       : std::vector<double>{2.0, 4.0};
        const auto wt = cfg.has("problem", "w_target") ? cfg.get_double_list("problem", "w_target")
                                                       : std::vector<double>(diag.size(), 1.0);
        if (wt.size() != diag.size()) throw ConfigError("config: w_target size must match a_diag");
        const std::string noise = cfg.get_string_or("problem", "noise", "none");
        QuadraticNoise mode = QuadraticNoise::None;
        if (noise == "additive") mode = QuadraticNoise::Additive;
        else if (noise == "lambda_multiplicative") mode = QuadraticNoise::LambdaMultiplicative;
        else if (noise != "none") throw ConfigError("config: unknown noise mode '" + noise + "'");
        const double s = cfg.get_double_or("problem", "noise_std", 0.0);
        const auto n = static_cast<std::int64_t>(diag.size());
        DenseMatrix a(n, n), b(n, n);
        for (std::int64_t i = 0; i < n; ++i) {
            a(i, i) = diag[static_cast<std::size_t>(i)];
            b(i, i) = 1.0;
        }
        out.problem = std::make_unique<QuadraticBilevel>(std::move(a), std::move(b), wt, mode, s);
        return out;
    }
    if (kind == "toy") {
        const double q = cfg.get_double_or("problem", "q", 0.9);
        const auto shift = cfg.has("problem", "shift") ? cfg.get_double_list("problem", "shift")
                                                       : std::vector<double>{1.0, 1.0};
        out.problem = std::make_unique<ToyContraction>(q, shift, cfg.get_double_or("problem", "noise_std", 0.0));
        return out;
    }
    if (kind == "logistic" || kind == "multinomial") {
        Dataset full = load_dataset(cfg);
        const std::string binarize = cfg.get_string_or("problem", "binarize", "none");
        if (binarize == "odd_even") full.y = binarize_odd_even(full.y);
        else if (binarize != "none") throw ConfigError("config: unknown binarize rule '" + binarize + "'");

        const std::int64_t n_tr = cfg.get_int_or("problem", "n_tr", full.n / 2);
        const std::int64_t n_val = cfg.get_int_or("problem", "n_val", full.n - n_tr);
        const auto split_seed =
            static_cast<std::uint64_t>(cfg.get_int_or("problem", "split_seed", static_cast<std::int64_t>(master_seed)));
        auto [train, val] = split_train_val(full, n_tr, n_val, split_seed);

        const std::string reg_s = cfg.get_string_or("problem", "reg", "single");
        if (reg_s != "single" && reg_s != "per_feature")
            throw ConfigError("config: reg must be single or per_feature");
        const RegMode reg = reg_s == "single" ? RegMode::Single : RegMode::PerFeature;
        const std::int64_t batch = cfg.get_int_or("problem", "batch_size", 50);
        const std::string sampler_s = cfg.get_string_or("problem", "sampler", "iid");
        if (sampler_s != "iid" && sampler_s != "epoch_shuffle")
            throw ConfigError("config: sampler must be iid or epoch_shuffle");
        const SamplerMode mode =
            sampler_s == "iid" ? SamplerMode::IidWithReplacement : SamplerMode::EpochShuffle;

        out.n_tr = n_tr;
        out.default_batch = batch;
        if (kind == "logistic") {
            out.problem =
                std::make_unique<RegLogistic>(std::move(train), std::move(val), reg, batch, mode, master_seed);
        } else {
            const int classes = static_cast<int>(cfg.get_int_or("problem", "classes", 10));
            out.problem = std::make_unique<MultinomialLogistic>(std::move(train), std::move(val), classes, reg,
                                                                batch, mode, master_seed);
        }
        return out;
    }
    throw ConfigError("config: unknown problem kind '" + kind + "'");
}

RealVec build_lambda(const ConfigFile& cfg, const Problem& problem, std::uint64_t draw_seed) {
    cfg.require_known_keys("lambda", {"values", "log_uniform"});
    const auto m = static_cast<std::size_t>(problem.dim_lambda());
    if (cfg.has("lambda", "log_uniform")) {
        const auto range = cfg.get_double_list("lambda", "log_uniform");
        if (range.size() != 2) throw ConfigError("config: log_uniform needs two numbers a,b");
        KeyedRng rng({derive_stream(draw_seed, 901), 0});
        RealVec lam(m);
        for (double& v : lam) v = std::exp(range[0] + (range[1] - range[0]) * rng.uniform());
        return lam;
    }
    auto values = cfg.has("lambda", "values") ? cfg.get_double_list("lambda", "values") : std::vector<double>{1.0};
    if (values.size() == 1 && m > 1) values.assign(m, values[0]);
    if (values.size() != m)
        throw ConfigError("config: lambda values must have 1 or dim_lambda entries");
    return values;
}

BudgetSpec build_budget(const ConfigFile& cfg, const BuiltProblem& built) {
    cfg.require_known_keys("budget", {"total_epochs", "checkpoints", "batch_ll", "batch_ls"});
    BudgetSpec budget;
    budget.total_epochs = cfg.get_double_or("budget", "total_epochs", 60.0);
    budget.n_checkpoints = static_cast<int>(cfg.get_int_or("budget", "checkpoints", 20));
    budget.n_tr = built.n_tr;
    budget.batch_ll = cfg.get_int_or("budget", "batch_ll", built.default_batch);
    budget.batch_ls = cfg.get_int_or("budget", "batch_ls", built.default_batch);
    return budget;
}

void write_bounds_overlay(const Problem& problem, const RealVec& lam, const BudgetSpec& budget,
                          const fs::path& path) {
    const ProblemConstants consts = problem.constants(lam);
    const double qq = 1.0 - consts.q * consts.q;
    const double beta = 2.0 / qq;
    const double sigma_lam2 =
        2.0 * (consts.L_PhiTilde * consts.L_PhiTilde + consts.q * consts.q) / ((1.0 - consts.q) * (1.0 - consts.q));
    const double gamma = beta * (1.0 + sigma_lam2);

    double w_norm = 0.0, g1_norm = 0.0;
    if (const auto w = problem.fixed_point(lam)) {
        w_norm = norm2(*w);
        g1_norm = norm2(problem.upper_grad1(*w, lam));
    }
    const auto rates = bounds::subproblem_rate_constants(consts, beta, gamma, w_norm, g1_norm);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "epoch,t,k,rho,sigma,bias_bound,var_inner,var_outer,mse_total,mse_floor,indicative\n";
    const auto stoch = VariantSpec::by_name("StochDec");
    char buf[400];
    for (int j = 0; j < budget.n_checkpoints; ++j) {
        const double frac = budget.n_checkpoints == 1
                                ? 1.0
                                : static_cast<double>(j) / static_cast<double>(budget.n_checkpoints - 1);
        const double epoch = budget.total_epochs * std::pow(30.0, frac - 1.0);
        const auto [t, k] = epoch_budget_to_iters(stoch, epoch, budget.n_tr, budget.batch_ll, budget.batch_ls);
        const double rho = rates.rho(t), sigma = rates.sigma(k);
        const double bias = bounds::bias_bound(consts, rho, sigma);
        const auto var = bounds::variance_bounds(consts, rho, sigma);
        const auto mse = bounds::mse_bound(consts, rho, sigma);
        std::snprintf(buf, sizeof buf, "%.17g,%lld,%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", epoch,
                      static_cast<long long>(t), static_cast<long long>(k), rho, sigma, bias, var.inner,
                      var.outer, mse.total, mse.floor, mse.indicative ? 1 : 0);
        out << buf;
    }
}

int cmd_run(const CommonFlags& flags) {
    const ConfigFile cfg = load_config(flags);
    cfg.require_known_keys("seeds", {"master", "replicates"});
    cfg.require_known_keys("variants", {"list"});
    cfg.require_known_keys("output", {"dir"});

    const auto master = static_cast<std::uint64_t>(cfg.get_int_or("seeds", "master", 1234));
    const int replicates = static_cast<int>(cfg.get_int_or("seeds", "replicates", 5));
    const BuiltProblem built = build_problem(cfg, master);
    const BudgetSpec budget = build_budget(cfg, built);
    const fs::path out_dir = resolve_out_dir(cfg);

    std::vector<VariantSpec> variants;
    if (cfg.has("variants", "list"))
        for (const auto& name : cfg.get_list("variants", "list")) variants.push_back(VariantSpec::by_name(name));
    else
        variants = {VariantSpec::by_name("Batch"), VariantSpec::by_name("StochConst"),
                    VariantSpec::by_name("StochDec")};

    const bool lambda_per_run = cfg.has("lambda", "log_uniform");
    RealVec lam0 = build_lambda(cfg, *built.problem, master);
    RealVec ref0;
    if (!lambda_per_run) ref0 = reference_gradient(*built.problem, lam0);

    std::vector<RunRecord> all_records;
    for (const auto& variant : variants) {
        std::vector<RunRecord> records(static_cast<std::size_t>(replicates));
        parallel_for(replicates, flags.workers, [&](std::int64_t r) {
            const std::uint64_t run_seed = derive_stream(master, 17000 + static_cast<std::uint64_t>(r));
            const RealVec lam = lambda_per_run ? build_lambda(cfg, *built.problem, run_seed) : lam0;
            const RealVec ref = lambda_per_run ? reference_gradient(*built.problem, lam) : ref0;
            records[static_cast<std::size_t>(r)] =
                run_variant(*built.problem, lam, variant, budget, run_seed, &ref, static_cast<int>(r));
        });
        const Curve curve = aggregate_runs(records);
        export_curves_csv({curve}, (out_dir / ("curve_" + variant.name + ".csv")).string());
        all_records.insert(all_records.end(), records.begin(), records.end());
    }
    export_records_csv(all_records, (out_dir / "records.csv").string());
    write_bounds_overlay(*built.problem, lam0, budget, out_dir / "bounds_overlay.csv");
    std::cout << "wrote " << variants.size() << " curve files + records.csv + bounds_overlay.csv to "
              << out_dir.string() << "\n";
    return 0;
}

int cmd_bilevel(const CommonFlags& flags) {
    const ConfigFile cfg = load_config(flags);
    cfg.require_known_keys("outer", {"steps", "lr", "warm_start", "domain", "lambda_min", "estimator",
                                     "epochs_per_step", "eval_every", "log_space", "jvp_samples"});
    if (!cfg.has_section("outer")) throw ConfigError("config: bilevel requires an [outer] section");

    const auto master = static_cast<std::uint64_t>(cfg.get_int_or("seeds", "master", 1234));
    const BuiltProblem built = build_problem(cfg, master);
    const Problem& problem = *built.problem;
    const fs::path out_dir = resolve_out_dir(cfg);

    OuterConfig ocfg;
    ocfg.steps = static_cast<int>(cfg.get_int_or("outer", "steps", 100));
    ocfg.lr = cfg.get_double_or("outer", "lr", 0.1);
    ocfg.warm_start = cfg.get_bool_or("outer", "warm_start", true);
    ocfg.log_space = cfg.get_bool_or("outer", "log_space", false);
    ocfg.eval_every = static_cast<int>(cfg.get_int_or("outer", "eval_every", 0));

    const std::string estimator = cfg.get_string_or("outer", "estimator", "StochDec");
    const double epochs_per_step = cfg.get_double_or("outer", "epochs_per_step", 20.0);
    ocfg.epoch_cost_per_step = epochs_per_step;
    RealVec lam0 = build_lambda(cfg, problem, master);

    if (estimator == "oracle") {
        ocfg.use_oracle = true;
    } else {
        const auto variant = VariantSpec::by_name(estimator);
        const BudgetSpec budget = build_budget(cfg, built);
        const auto [t, k] =
            epoch_budget_to_iters(variant, epochs_per_step, budget.n_tr, budget.batch_ll, budget.batch_ls);
        ocfg.estimator.t = t;
        ocfg.estimator.k = k;
        ocfg.estimator.jvp_samples = static_cast<int>(cfg.get_int_or("outer", "jvp_samples", 1));
        if (variant.algo_ll == SubAlgo::GD && variant.algo_ls == SubAlgo::GD) {
            ocfg.estimator.deterministic = true;
        } else {
            const double q = problem.contraction_modulus(lam0);
            ocfg.estimator.lower = variant_schedule(variant.algo_ll, q);
            ocfg.estimator.linear = variant_schedule(variant.algo_ls, q);
        }
    }

    HyperDomain domain = HyperDomain::positive_orthant(cfg.get_double_or("outer", "lambda_min", 0.0));
    const std::string domain_s = cfg.get_string_or("outer", "domain", "positive");
    if (domain_s == "unconstrained") domain = HyperDomain::unconstrained();
    else if (domain_s != "positive") throw ConfigError("config: domain must be positive or unconstrained");

    const OuterTrace trace = outer_sgd(problem, lam0, domain, ocfg, master);

    std::ofstream out(out_dir / "outer_trace.csv");
    if (!out) throw std::runtime_error("cannot write outer_trace.csv");
    const int m = problem.dim_lambda();
    out << "step,epochs,f_estimate,val_loss,test_accuracy,lambda_norm";
    const int lam_cols = std::min(m, 16);
    for (int j = 0; j < lam_cols; ++j) out << ",lambda_" << j;
    out << "\n";
    char buf[64];
    for (std::size_t s = 0; s < trace.steps.size(); ++s) {
        const auto& st = trace.steps[s];
        out << s;
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g", st.epochs_spent, st.f_estimate);
        out << buf;
        if (st.val_loss) {
            std::snprintf(buf, sizeof buf, ",%.17g", *st.val_loss);
            out << buf;
        } else {
            out << ",";
        }
        if (st.test_accuracy) {
            std::snprintf(buf, sizeof buf, ",%.17g", *st.test_accuracy);
            out << buf;
        } else {
            out << ",";
        }
        std::snprintf(buf, sizeof buf, ",%.17g", norm2(st.lambda));
        out << buf;
        for (int j = 0; j < lam_cols; ++j) {
            std::snprintf(buf, sizeof buf, ",%.17g", st.lambda[static_cast<std::size_t>(j)]);
            out << buf;
        }
        out << "\n";
    }
    std::cout << "wrote outer_trace.csv (" << trace.steps.size() << " steps) to " << out_dir.string() << "\n";
    return 0;
}

int cmd_bounds(const CommonFlags& flags) {
    const ConfigFile cfg = load_config(flags);
    cfg.require_known_keys("bounds", {"source", "q", "L_E", "nu1", "nu2", "mu1", "mu2", "L_Phi", "L_PhiTilde",
                                      "m2", "sigma_lam1", "w_norm", "grad1E_norm", "beta", "gamma", "t_list",
                                      "k_list"});
    const fs::path out_dir = resolve_out_dir(cfg);
    const std::string source = cfg.get_string_or("bounds", "source", "problem");

    ProblemConstants consts;
    double w_norm = 0.0, g1_norm = 0.0;
    if (source == "problem") {
        const auto master = static_cast<std::uint64_t>(cfg.get_int_or("seeds", "master", 1234));
        const BuiltProblem built = build_problem(cfg, master);
        const RealVec lam = build_lambda(cfg, *built.problem, master);
        consts = built.problem->constants(lam);
        if (const auto w = built.problem->fixed_point(lam)) {
            w_norm = norm2(*w);
            g1_norm = norm2(built.problem->upper_grad1(*w, lam));
        }
    } else if (source == "explicit") {
        consts.q = cfg.get_double("bounds", "q");
        consts.L_E = cfg.get_double_or("bounds", "L_E", 0.0);
        consts.nu1 = cfg.get_double_or("bounds", "nu1", 0.0);
        consts.nu2 = cfg.get_double_or("bounds", "nu2", 0.0);
        consts.mu1 = cfg.get_double_or("bounds", "mu1", 0.0);
        consts.mu2 = cfg.get_double_or("bounds", "mu2", 0.0);
        consts.L_Phi = cfg.get_double_or("bounds", "L_Phi", 0.0);
        consts.L_PhiTilde = cfg.get_double_or("bounds", "L_PhiTilde", consts.q);
        consts.m2 = cfg.get_double_or("bounds", "m2", 0.0);
        consts.sigma_lam1 = cfg.get_double_or("bounds", "sigma_lam1", 0.0);
        w_norm = cfg.get_double_or("bounds", "w_norm", 1.0);
        g1_norm = cfg.get_double_or("bounds", "grad1E_norm", 1.0);
    } else {
        throw ConfigError("config: bounds source must be problem or explicit");
    }

    const double qq = 1.0 - consts.q * consts.q;
    const double sigma_lam2 =
        2.0 * (consts.L_PhiTilde * consts.L_PhiTilde + consts.q * consts.q) / ((1.0 - consts.q) * (1.0 - consts.q));
    const double beta = cfg.get_double_or("bounds", "beta", 2.0 / qq);
    const double gamma = cfg.get_double_or("bounds", "gamma", beta * (1.0 + sigma_lam2));
    const auto rates = bounds::subproblem_rate_constants(consts, beta, gamma, w_norm, g1_norm);

    std::vector<double> t_list{10, 100, 1000};
    if (cfg.has("bounds", "t_list")) t_list = cfg.get_double_list("bounds", "t_list");
    std::vector<double> k_list = t_list;
    if (cfg.has("bounds", "k_list")) k_list = cfg.get_double_list("bounds", "k_list");
    if (k_list.size() != t_list.size()) throw ConfigError("config: t_list and k_list must have equal length");

    std::ofstream out(out_dir / "bounds.csv");
    if (!out) throw std::runtime_error("cannot write bounds.csv");
    out << "t,k,rho,sigma,bias_bound,var_inner,var_outer,mse_total,mse_floor,indicative\n";
    char buf[400];
    for (std::size_t i = 0; i < t_list.size(); ++i) {
        const auto t = static_cast<std::int64_t>(t_list[i]);
        const auto k = static_cast<std::int64_t>(k_list[i]);
        const double rho = rates.rho(t), sigma = rates.sigma(k);
        const auto var = bounds::variance_bounds(consts, rho, sigma);
        const auto mse = bounds::mse_bound(consts, rho, sigma);
        std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                      static_cast<long long>(t), static_cast<long long>(k), rho, sigma,
                      bounds::bias_bound(consts, rho, sigma), var.inner, var.outer, mse.total, mse.floor,
                      mse.indicative ? 1 : 0);
        out << buf;
    }
    std::cout << "wrote bounds.csv to " << out_dir.string() << "\n";
    return 0;
}

struct ConvertFlags {
    std::string from, to;
    std::string input;
    std::string images, labels;
    std::string out;
    std::string out_images, out_labels;
};

int cmd_convert(const ConvertFlags& flags) {
    Dataset ds;
    // unreadable or malformed inputs are usage errors for this command
    try {
        if (flags.from == "idx") {
            if (flags.images.empty() || flags.labels.empty())
                throw ConfigError("convert: idx input needs --images and --labels");
            ds = load_idx(flags.images, flags.labels);
        } else if (flags.from == "libsvm") {
            if (flags.input.empty()) throw ConfigError("convert: --input required");
            ds = load_libsvm(flags.input);
        } else if (flags.from == "csv") {
            if (flags.input.empty()) throw ConfigError("convert: --input required");
            ds = load_csv(flags.input);
        } else {
            throw ConfigError("convert: --from must be idx, libsvm, or csv");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }

    if (flags.to == "csv") {
        if (flags.out.empty()) throw ConfigError("convert: --output required");
        write_csv_dataset(ds, flags.out);
    } else if (flags.to == "idx") {
        if (flags.out_images.empty() || flags.out_labels.empty())
            throw ConfigError("convert: idx output needs --out-images and --out-labels");
        write_idx(ds, flags.out_images, flags.out_labels);
    } else {
        throw ConfigError("convert: --to must be csv or idx");
    }
    std::cout << "converted " << ds.n << " rows x " << ds.d << " features\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic hypergradient estimation experiments"};
    app.require_subcommand(1);

    CommonFlags run_flags, bilevel_flags, bounds_flags;
    ConvertFlags conv;

    CLI::App* run = app.add_subcommand("run", "hypergradient-error experiment over variants");
    add_common(run, run_flags);
    CLI::App* bilevel = app.add_subcommand("bilevel", "projected SGD on the hyperparameters");
    add_common(bilevel, bilevel_flags);
    CLI::App* bnd = app.add_subcommand("bounds", "theoretical bound table");
    add_common(bnd, bounds_flags);

    CLI::App* convert = app.add_subcommand("convert", "dataset format conversion");
    convert->add_option("--from", conv.from, "input format: idx|libsvm|csv")->required();
    convert->add_option("--to", conv.to, "output format: csv|idx")->required();
    convert->add_option("--input", conv.input, "input file (libsvm/csv)");
    convert->add_option("--images", conv.images, "idx image file");
    convert->add_option("--labels", conv.labels, "idx label file");
    convert->add_option("--output", conv.out, "output file (csv)");
    convert->add_option("--out-images", conv.out_images, "idx image output");
    convert->add_option("--out-labels", conv.out_labels, "idx label output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_flags);
        if (bilevel->parsed()) return cmd_bilevel(bilevel_flags);
        if (bnd->parsed()) return cmd_bounds(bounds_flags);
        if (convert->parsed()) return cmd_convert(conv);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
