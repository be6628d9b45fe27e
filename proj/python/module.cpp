#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hypergrad/bounds.hpp"
#include "hypergrad/diagnostics.hpp"
#include "hypergrad/harness.hpp"
#include "hypergrad/outer.hpp"
#include "hypergrad/problems/logistic.hpp"
#include "hypergrad/problems/multinomial.hpp"
#include "hypergrad/problems/quadratic_bilevel.hpp"
#include "hypergrad/problems/toy_contraction.hpp"
#include "hypergrad/sid.hpp"

namespace py = pybind11;
using namespace hypergrad;

namespace {

Dataset make_dataset(std::int64_t n, std::int64_t d, std::vector<double> x_flat, std::vector<int> y) {
    if (static_cast<std::int64_t>(x_flat.size()) != n * d)
        throw std::invalid_argument("make_dataset: X must have n*d entries");
    if (static_cast<std::int64_t>(y.size()) != n)
        throw std::invalid_argument("make_dataset: y must have n entries");
    Dataset ds;
    ds.n = n;
    ds.d = d;
    ds.X = std::move(x_flat);
    ds.y = std::move(y);
    return ds;
}

StepSchedule schedule_from(const std::string& kind, double q, double sigma2, double eta) {
    if (kind == "fixed") return StepSchedule::fixed(eta);
    if (kind == "constant") return StepSchedule::constant_step(sigma2);
    if (kind == "decreasing") return StepSchedule::decreasing(q, sigma2);
    throw std::invalid_argument("schedule kind must be fixed, constant, or decreasing");
}

}  // namespace

PYBIND11_MODULE(hypergrad_py, m) {
    m.doc() = "stochastic hypergradient estimation for fixed-point bilevel problems";

    py::class_<ProblemConstants>(m, "ProblemConstants")
        .def_readonly("q", &ProblemConstants::q)
        .def_readonly("L_E", &ProblemConstants::L_E)
        .def_readonly("nu1", &ProblemConstants::nu1)
        .def_readonly("nu2", &ProblemConstants::nu2)
        .def_readonly("mu1", &ProblemConstants::mu1)
        .def_readonly("mu2", &ProblemConstants::mu2)
        .def_readonly("L_Phi", &ProblemConstants::L_Phi)
        .def_readonly("L_PhiTilde", &ProblemConstants::L_PhiTilde)
        .def_readonly("m2", &ProblemConstants::m2)
        .def_readonly("sigma_lam1", &ProblemConstants::sigma_lam1)
        .def_readonly("sigma_lam2", &ProblemConstants::sigma_lam2)
        .def_readonly("estimated_fields", &ProblemConstants::estimated_fields);

    py::class_<Problem>(m, "Problem")
        .def("dim_w", &Problem::dim_w)
        .def("dim_lambda", &Problem::dim_lambda)
        .def("phi_mean", &Problem::phi_mean)
        .def("upper_value", &Problem::upper_value)
        .def("upper_grad1", &Problem::upper_grad1)
        .def("upper_grad2", &Problem::upper_grad2)
        .def("fixed_point", &Problem::fixed_point)
        .def("exact_hypergrad", &Problem::exact_hypergrad)
        .def("constants", &Problem::constants);

    py::class_<ToyContraction, Problem>(m, "ToyContraction")
        .def(py::init<double, RealVec, double>(), py::arg("q"), py::arg("shift"), py::arg("noise_std"));

    py::enum_<QuadraticNoise>(m, "QuadraticNoise")
        .value("NONE", QuadraticNoise::None)
        .value("ADDITIVE", QuadraticNoise::Additive)
        .value("LAMBDA_MULTIPLICATIVE", QuadraticNoise::LambdaMultiplicative);

    py::class_<QuadraticBilevel, Problem>(m, "QuadraticBilevel")
        .def(py::init([](const std::vector<double>& a_diag, const std::vector<double>& w_target,
                         QuadraticNoise noise, double noise_std) {
                 const auto n = static_cast<std::int64_t>(a_diag.size());
                 DenseMatrix a(n, n), b(n, n);
                 for (std::int64_t i = 0; i < n; ++i) {
                     a(i, i) = a_diag[static_cast<std::size_t>(i)];
                     b(i, i) = 1.0;
                 }
                 return QuadraticBilevel(std::move(a), std::move(b), w_target, noise, noise_std);
             }),
             py::arg("a_diag"), py::arg("w_target"), py::arg("noise") = QuadraticNoise::None,
             py::arg("noise_std") = 0.0)
        .def_property_readonly("alpha", &QuadraticBilevel::alpha)
        .def_property_readonly("q", &QuadraticBilevel::q);

    m.def("canonical_quadratic", &canonical_quadratic, py::arg("noise") = QuadraticNoise::None,
          py::arg("noise_std") = 0.0);

    py::enum_<RegMode>(m, "RegMode")
        .value("SINGLE", RegMode::Single)
        .value("PER_FEATURE", RegMode::PerFeature);

    py::enum_<SamplerMode>(m, "SamplerMode")
        .value("IID_WITH_REPLACEMENT", SamplerMode::IidWithReplacement)
        .value("EPOCH_SHUFFLE", SamplerMode::EpochShuffle);

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("n", &Dataset::n)
        .def_readonly("d", &Dataset::d)
        .def_readonly("X", &Dataset::X)
        .def_readonly("y", &Dataset::y);

    m.def("make_dataset", &make_dataset, py::arg("n"), py::arg("d"), py::arg("x_flat"), py::arg("y"));

    py::class_<RegLogistic, Problem>(m, "RegLogistic")
        .def(py::init<Dataset, Dataset, RegMode, std::int64_t, SamplerMode, std::uint64_t>(), py::arg("train"),
             py::arg("val"), py::arg("reg_mode"), py::arg("batch_size"),
             py::arg("sampler_mode") = SamplerMode::IidWithReplacement, py::arg("sampler_seed") = 0)
        .def("solve_fixed_point", &RegLogistic::solve_fixed_point, py::arg("lam"), py::arg("tol"),
             py::arg("max_iters") = 2000000)
        .def("accuracy", &RegLogistic::accuracy);

    py::class_<MultinomialLogistic, Problem>(m, "MultinomialLogistic")
        .def(py::init<Dataset, Dataset, int, RegMode, std::int64_t, SamplerMode, std::uint64_t>(),
             py::arg("train"), py::arg("val"), py::arg("n_classes"), py::arg("reg_mode"), py::arg("batch_size"),
             py::arg("sampler_mode") = SamplerMode::IidWithReplacement, py::arg("sampler_seed") = 0);

    py::class_<StepSchedule>(m, "StepSchedule")
        .def("value_at", &StepSchedule::value_at)
        .def_static("fixed", &StepSchedule::fixed)
        .def_static("constant_step", &StepSchedule::constant_step, py::arg("sigma2"),
                    py::arg("eta_override") = std::nullopt)
        .def_static("decreasing", &StepSchedule::decreasing, py::arg("q"), py::arg("sigma2"),
                    py::arg("beta") = std::nullopt, py::arg("gamma") = std::nullopt)
        .def_static("two_phase", &StepSchedule::two_phase);
    m.def("schedule", &schedule_from, py::arg("kind"), py::arg("q") = 0.0, py::arg("sigma2") = 0.0,
          py::arg("eta") = 1.0);
    m.def("lipschitz_to_variance", &lipschitz_to_variance);

    py::class_<HypergradEstimate>(m, "HypergradEstimate")
        .def_readonly("grad", &HypergradEstimate::grad)
        .def_readonly("t", &HypergradEstimate::t)
        .def_readonly("k", &HypergradEstimate::k)
        .def_readonly("jvp_samples", &HypergradEstimate::jvp_samples)
        .def_readonly("seeds", &HypergradEstimate::seeds)
        .def_readonly("variant_tag", &HypergradEstimate::variant_tag)
        .def_readonly("epoch_cost", &HypergradEstimate::epoch_cost)
        .def_readonly("w_lower", &HypergradEstimate::w_lower);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("final", &Trajectory::final)
        .def_readonly("sample_count", &Trajectory::sample_count)
        .def("checkpoints",
             [](const Trajectory& t) {
                 std::vector<std::pair<std::int64_t, RealVec>> out;
                 out.reserve(t.checkpoints.size());
                 for (const auto& p : t.checkpoints) out.emplace_back(p.iter, p.value);
                 return out;
             });

    m.def(
        "solve_lower",
        [](const Problem& p, const RealVec& lam, std::int64_t t, const StepSchedule& sched,
           std::uint64_t stream_id) { return solve_lower(p, lam, t, sched, {stream_id, 0}); },
        py::arg("problem"), py::arg("lam"), py::arg("t"), py::arg("schedule"), py::arg("stream_id"));
    m.def(
        "solve_linear",
        [](const Problem& p, const RealVec& w, const RealVec& lam, std::int64_t k, const StepSchedule& sched,
           std::uint64_t stream_id) { return solve_linear(p, w, lam, k, sched, {stream_id, 0}); },
        py::arg("problem"), py::arg("w"), py::arg("lam"), py::arg("k"), py::arg("schedule"),
        py::arg("stream_id"));

    m.def(
        "sid_estimate",
        [](const Problem& p, const RealVec& lam, std::int64_t t, std::int64_t k, const StepSchedule& lower,
           const StepSchedule& linear, std::uint64_t seed, int jvp_samples) {
            return sid_estimate(p, lam, t, k, lower, linear, seed, jvp_samples);
        },
        py::arg("problem"), py::arg("lam"), py::arg("t"), py::arg("k"), py::arg("lower_schedule"),
        py::arg("linear_schedule"), py::arg("master_seed"), py::arg("jvp_samples") = 1);
    m.def("aid_batch", &aid_batch, py::arg("problem"), py::arg("lam"), py::arg("t"), py::arg("k"));
    m.def("quadratic_form_value", &quadratic_form_value);
    m.def("reference_gradient", &reference_gradient);

    py::class_<UnbiasednessReport>(m, "UnbiasednessReport")
        .def_readonly("mean_gap", &UnbiasednessReport::mean_gap)
        .def_readonly("mc_std", &UnbiasednessReport::mc_std);
    m.def(
        "check_unbiasedness",
        [](const Problem& p, const RealVec& w, const RealVec& lam, int n, std::uint64_t seed) {
            return check_unbiasedness(p, w, lam, n, seed);
        },
        py::arg("problem"), py::arg("w"), py::arg("lam"), py::arg("n_samples"), py::arg("master_seed"));

    py::class_<ContractionEstimate>(m, "ContractionEstimate")
        .def_readonly("q_est", &ContractionEstimate::q_est)
        .def_readonly("verified", &ContractionEstimate::verified);
    m.def("estimate_contraction", &estimate_contraction, py::arg("problem"), py::arg("lam"),
          py::arg("n_probe_points") = 3, py::arg("n_power_iters") = 100, py::arg("master_seed") = 0);

    py::class_<EstimatorConfig>(m, "EstimatorConfig")
        .def(py::init<>())
        .def_readwrite("t", &EstimatorConfig::t)
        .def_readwrite("k", &EstimatorConfig::k)
        .def_readwrite("lower", &EstimatorConfig::lower)
        .def_readwrite("linear", &EstimatorConfig::linear)
        .def_readwrite("jvp_samples", &EstimatorConfig::jvp_samples)
        .def_readwrite("deterministic", &EstimatorConfig::deterministic);

    py::class_<MomentReport>(m, "MomentReport")
        .def_readonly("mse", &MomentReport::mse)
        .def_readonly("bias_sq", &MomentReport::bias_sq)
        .def_readonly("variance", &MomentReport::variance)
        .def_readonly("mse_std_err", &MomentReport::mse_std_err)
        .def_readonly("n", &MomentReport::n);
    m.def(
        "empirical_moments",
        [](const Problem& p, const RealVec& lam, const EstimatorConfig& cfg, int n, std::uint64_t seed,
           int workers) { return empirical_moments(p, lam, cfg, n, seed, nullptr, workers); },
        py::arg("problem"), py::arg("lam"), py::arg("config"), py::arg("n_replicates"), py::arg("master_seed"),
        py::arg("workers") = 1);

    auto b = m.def_submodule("bounds", "closed-form rate and error bounds");
    b.def("c1_constant", &bounds::c1_constant);
    b.def("bias_bound", &bounds::bias_bound);
    b.def("km_constant_envelope", &bounds::km_constant_envelope);
    b.def("km_decreasing_c", &bounds::km_decreasing_c);
    py::class_<bounds::MseBound>(b, "MseBound")
        .def_readonly("total", &bounds::MseBound::total)
        .def_readonly("floor", &bounds::MseBound::floor)
        .def_readonly("indicative", &bounds::MseBound::indicative);
    b.def("mse_bound", &bounds::mse_bound);
    py::enum_<bounds::SgdAlpha>(b, "SgdAlpha")
        .value("INVERSE_L", bounds::SgdAlpha::InverseL)
        .value("TWO_OVER_L_PLUS_TAU", bounds::SgdAlpha::TwoOverLPlusTau);
    py::class_<bounds::SgdRates>(b, "SgdRates")
        .def_readonly("r1", &bounds::SgdRates::r1)
        .def_readonly("r2", &bounds::SgdRates::r2)
        .def_readonly("beta_min", &bounds::SgdRates::beta_min)
        .def_readonly("r3", &bounds::SgdRates::r3);
    b.def(
        "sgd_rates",
        [](double L, double tau, double sigma1_prime, double sigma2_prime, double eta,
           bounds::SgdAlpha alpha_choice, std::optional<double> beta) {
            return bounds::sgd_rates(L, tau, sigma1_prime, sigma2_prime, eta, beta, alpha_choice);
        },
        py::arg("L"), py::arg("tau"), py::arg("sigma1_prime"), py::arg("sigma2_prime"), py::arg("eta"),
        py::arg("alpha_choice"), py::arg("beta") = std::nullopt);
    py::class_<bounds::BottouRates>(b, "BottouRates")
        .def_readonly("r1", &bounds::BottouRates::r1)
        .def_readonly("r2", &bounds::BottouRates::r2);
    b.def("bottou_rates", &bounds::bottou_rates);
    py::class_<bounds::SubproblemRates>(b, "SubproblemRates")
        .def_readonly("d_w", &bounds::SubproblemRates::d_w)
        .def_readonly("d_v", &bounds::SubproblemRates::d_v)
        .def_readonly("sigma_lam1", &bounds::SubproblemRates::sigma_lam1)
        .def_readonly("sigma_lam2", &bounds::SubproblemRates::sigma_lam2);
    b.def("subproblem_rate_constants", &bounds::subproblem_rate_constants);
}
