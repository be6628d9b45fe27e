#include "hypergrad/outer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hypergrad/problems/logistic.hpp"
#include "hypergrad/problems/multinomial.hpp"

namespace hypergrad {

RealVec HyperDomain::project(RealVec lam) const {
    switch (kind) {
        case Kind::Unconstrained:
            return lam;
        case Kind::PositiveOrthant:
            for (double& v : lam) v = std::max(v, lambda_min);
            return lam;
        case Kind::Box:
            for (std::size_t i = 0; i < lam.size(); ++i) lam[i] = std::clamp(lam[i], lower[i], upper[i]);
            return lam;
    }
    return lam;
}

bool HyperDomain::contains(const RealVec& lam) const {
    switch (kind) {
        case Kind::Unconstrained:
            return true;
        case Kind::PositiveOrthant:
            for (double v : lam)
                if (v < lambda_min) return false;
            return true;
        case Kind::Box:
            for (std::size_t i = 0; i < lam.size(); ++i)
                if (lam[i] < lower[i] || lam[i] > upper[i]) return false;
            return true;
    }
    return true;
}

HyperDomain HyperDomain::box(RealVec lower, RealVec upper) {
    if (lower.size() != upper.size()) throw std::invalid_argument("HyperDomain::box: bound size mismatch");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (lower[i] > upper[i]) throw std::invalid_argument("HyperDomain::box: empty box");
    HyperDomain d;
    d.kind = Kind::Box;
    d.lower = std::move(lower);
    d.upper = std::move(upper);
    return d;
}

HyperDomain HyperDomain::positive_orthant(double lambda_min) {
    HyperDomain d;
    d.kind = Kind::PositiveOrthant;
    d.lambda_min = lambda_min;
    return d;
}

HyperDomain HyperDomain::unconstrained() { return {}; }

namespace {

// deterministic fixed-point solve used by evaluate()
RealVec solve_lower_exact(const Problem& problem, const RealVec& lam, double tol) {
    RealVec w(static_cast<std::size_t>(problem.dim_w()), 0.0);
    for (std::int64_t it = 0; it < 4000000; ++it) {
        RealVec next = problem.phi_mean(w, lam);
        const double gap = std::sqrt(sq_dist(next, w));
        w = std::move(next);
        if (gap <= tol) return w;
    }
    throw std::runtime_error("evaluate: lower level did not reach tolerance");
}

}  // namespace

OuterTrace outer_sgd(const Problem& problem, RealVec lambda0, const HyperDomain& domain,
                     const OuterConfig& config, std::uint64_t master_seed) {
    if (!domain.contains(lambda0)) throw std::invalid_argument("outer_sgd: lambda0 outside the domain");

    OuterTrace trace;
    RealVec lam = std::move(lambda0);
    RealVec warm;  // previous lower-level solution
    double epochs = 0.0;

    for (int s = 0; s < config.steps; ++s) {
        RealVec grad;
        RealVec w_hat;
        if (config.use_oracle) {
            const auto exact = problem.exact_hypergrad(lam);
            if (!exact) throw std::invalid_argument("outer_sgd: problem has no exact hypergradient oracle");
            grad = *exact;
            w_hat = problem.fixed_point(lam).value_or(zeros(static_cast<std::size_t>(problem.dim_w())));
        } else {
            const std::uint64_t step_seed = derive_stream(master_seed, 0x0C7E4 + static_cast<std::uint64_t>(s));
            const RealVec* w0 = (config.warm_start && !warm.empty()) ? &warm : nullptr;
            HypergradEstimate est;
            if (config.estimator.deterministic) {
                const DeterministicView det(problem);
                const StepSchedule unit = StepSchedule::fixed(1.0);
                est = sid_estimate(det, lam, config.estimator.t, config.estimator.k, unit, unit, step_seed, 1, w0);
            } else {
                est = sid_estimate(problem, lam, config.estimator.t, config.estimator.k, config.estimator.lower,
                                   config.estimator.linear, step_seed, config.estimator.jvp_samples, w0);
            }
            grad = std::move(est.grad);
            w_hat = std::move(est.w_lower);
            warm = w_hat;
        }

        OuterStep step;
        step.lambda = lam;
        step.epochs_spent = epochs;

        if (!all_finite(grad) || !all_finite(lam)) {
            trace.steps.push_back(std::move(step));
            break;
        }

        step.f_estimate = problem.upper_value(w_hat, lam);
        if (config.eval_every > 0 && (s % config.eval_every == 0 || s == config.steps - 1)) {
            const EvalReport rep = evaluate(problem, lam, config.test_set);
            step.val_loss = rep.val_loss;
            step.test_accuracy = rep.accuracy;
        }
        trace.steps.push_back(step);

        if (config.log_space) {
            // multiplicative update: gradient with respect to log(lambda)
            for (std::size_t i = 0; i < lam.size(); ++i)
                lam[i] = lam[i] * std::exp(-config.lr * grad[i] * lam[i]);
        } else {
            axpy(-config.lr, grad, lam);
        }
        lam = domain.project(std::move(lam));
        if (!all_finite(lam)) break;
        epochs += config.epoch_cost_per_step;
    }
    return trace;
}

EvalReport evaluate(const Problem& problem, const RealVec& lam, const Dataset* eval_set) {
    if (!all_finite(lam)) throw std::invalid_argument("evaluate: non-finite lambda");
    const RealVec w = solve_lower_exact(problem, lam, 1e-10);
    EvalReport rep;
    rep.val_loss = problem.upper_value(w, lam);
    if (eval_set) {
        if (const auto* lp = dynamic_cast<const RegLogistic*>(&problem)) {
            rep.accuracy = lp->accuracy(w, *eval_set);
        } else if (const auto* mp = dynamic_cast<const MultinomialLogistic*>(&problem)) {
            rep.accuracy = mp->accuracy(w, *eval_set);
        }
    }
    return rep;
}

}  // namespace hypergrad
