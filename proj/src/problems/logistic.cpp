#include "hypergrad/problems/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypergrad {

namespace {

// log(1 + e^{-u}), stable for both tails
double psi(double u) {
    if (u >= 0.0) return std::log1p(std::exp(-u));
    return -u + std::log1p(std::exp(u));
}

// psi'(u) = -1/(1 + e^u)
double psi_d1(double u) {
    if (u >= 0.0) {
        const double e = std::exp(-u);
        return -e / (1.0 + e);
    }
    return -1.0 / (1.0 + std::exp(u));
}

// psi''(u) = sigmoid(u) sigmoid(-u), in (0, 1/4]
double psi_d2(double u) {
    const double e = std::exp(-std::fabs(u));
    const double s = e / (1.0 + e);
    return s * (1.0 - s);
}

constexpr double kMaxPsiD3 = 0.09622504486493764;  // 1/(6 sqrt(3))

void check_labels(const Dataset& ds, const char* which) {
    for (int y : ds.y)
        if (y != 1 && y != -1)
            throw std::invalid_argument(std::string("logistic_problem: ") + which + " labels must be -1 or +1");
}

double sum_row_norms(const Dataset& ds) {
    double s = 0.0;
    for (std::int64_t i = 0; i < ds.n; ++i) s += norm2(ds.row(i));
    return s;
}

double gram_norm(const Dataset& ds) {
    if (ds.n == 0 || ds.d == 0) return 0.0;
    return std::max(0.0, power_iteration_sym(
                             [&](const RealVec& v) {
                                 RealVec u(static_cast<std::size_t>(ds.d), 0.0);
                                 for (std::int64_t i = 0; i < ds.n; ++i) {
                                     const auto row = ds.row(i);
                                     axpy(dot(row, v), row, u);
                                 }
                                 return u;
                             },
                             ds.d));
}

}  // namespace

RegLogistic::RegLogistic(Dataset train, Dataset val, RegMode reg_mode, std::int64_t batch_size,
                         SamplerMode sampler_mode, std::uint64_t sampler_seed)
    : train_(std::move(train)),
      val_(std::move(val)),
      reg_mode_(reg_mode),
      sampler_(train_.n, batch_size, sampler_mode, sampler_seed) {
    check_labels(train_, "train");
    check_labels(val_, "validation");
    if (val_.d != train_.d) throw std::invalid_argument("logistic_problem: train/val dimension mismatch");
    gram_norm_tr_ = gram_norm(train_);
    gram_norm_val_ = gram_norm(val_);
    sum_norm_val_ = sum_row_norms(val_);
    for (std::int64_t i = 0; i < train_.n; ++i) {
        const double nn = norm2(train_.row(i));
        sum_norm3_tr_ += nn * nn * nn;
        max_row_sq_tr_ = std::max(max_row_sq_tr_, nn * nn);
    }
}

RealVec RegLogistic::reg_diag(const RealVec& lam) const {
    const std::size_t d = static_cast<std::size_t>(train_.d);
    if (reg_mode_ == RegMode::Single) {
        if (lam.size() != 1) throw std::invalid_argument("logistic: lambda must be scalar in Single mode");
        return RealVec(d, lam[0]);
    }
    if (lam.size() != d) throw std::invalid_argument("logistic: lambda dimension must match features");
    return lam;
}

StepConstants RegLogistic::step_constants(const RealVec& lam) const {
    const RealVec reg = reg_diag(lam);
    double lo = reg[0], hi = reg[0];
    for (double v : reg) {
        if (v <= 0.0) throw std::invalid_argument("logistic: regularization parameters must be positive");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    StepConstants c;
    c.tau = lo;
    c.L = hi + 0.25 * gram_norm_tr_;
    c.alpha = 2.0 / (c.L + c.tau);
    c.q = (c.L - c.tau) / (c.L + c.tau);
    return c;
}

RealVec RegLogistic::lower_grad(const RealVec& w, const RealVec& lam) const {
    const RealVec reg = reg_diag(lam);
    RealVec g(w.size(), 0.0);
    for (std::int64_t i = 0; i < train_.n; ++i) {
        const auto row = train_.row(i);
        const double y = train_.y[static_cast<std::size_t>(i)];
        axpy(psi_d1(y * dot(row, w)) * y, row, g);
    }
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += reg[j] * w[j];
    return g;
}

double RegLogistic::lower_value(const RealVec& w, const RealVec& lam) const {
    const RealVec reg = reg_diag(lam);
    double v = 0.0;
    for (std::int64_t i = 0; i < train_.n; ++i)
        v += psi(train_.y[static_cast<std::size_t>(i)] * dot(train_.row(i), w));
    for (std::size_t j = 0; j < w.size(); ++j) v += 0.5 * reg[j] * w[j] * w[j];
    return v;
}

RealVec RegLogistic::phi_mean(const RealVec& w, const RealVec& lam) const {
    const double alpha = step_constants(lam).alpha;
    RealVec g = lower_grad(w, lam);
    RealVec out(w);
    axpy(-alpha, g, out);
    return out;
}

RealVec RegLogistic::phi_sample(const RealVec& w, const RealVec& lam, const SampleKey& key) const {
    const RealVec reg = reg_diag(lam);
    const double alpha = step_constants(lam).alpha;
    const auto idx = sampler_.draw(key);
    const double scale_n = static_cast<double>(train_.n) / static_cast<double>(idx.size());
    RealVec g(w.size(), 0.0);
    for (const std::int64_t i : idx) {
        const auto row = train_.row(i);
        const double y = train_.y[static_cast<std::size_t>(i)];
        axpy(psi_d1(y * dot(row, w)) * y, row, g);
    }
    scale(g, scale_n);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += reg[j] * w[j];
    RealVec out(w);
    axpy(-alpha, g, out);
    return out;
}

RealVec RegLogistic::jvp1_t_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const {
    const RealVec reg = reg_diag(lam);
    const double alpha = step_constants(lam).alpha;
    RealVec hv(v.size(), 0.0);
    for (std::int64_t i = 0; i < train_.n; ++i) {
        const auto row = train_.row(i);
        axpy(psi_d2(train_.y[static_cast<std::size_t>(i)] * dot(row, w)) * dot(row, v), row, hv);
    }
    RealVec out(v);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] -= alpha * (hv[j] + reg[j] * v[j]);
    return out;
}

RealVec RegLogistic::jvp1_t_sample(const RealVec& w, const RealVec& lam, const SampleKey& key,
                                   const RealVec& v) const {
    const RealVec reg = reg_diag(lam);
    const double alpha = step_constants(lam).alpha;
    const auto idx = sampler_.draw(key);
    const double scale_n = static_cast<double>(train_.n) / static_cast<double>(idx.size());
    RealVec hv(v.size(), 0.0);
    for (const std::int64_t i : idx) {
        const auto row = train_.row(i);
        axpy(psi_d2(train_.y[static_cast<std::size_t>(i)] * dot(row, w)) * dot(row, v), row, hv);
    }
    scale(hv, scale_n);
    RealVec out(v);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] -= alpha * (hv[j] + reg[j] * v[j]);
    return out;
}

RealVec RegLogistic::jvp2_t_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const {
    const double alpha = step_constants(lam).alpha;
    if (reg_mode_ == RegMode::Single) return {-alpha * dot(w, v)};
    RealVec out(w.size(), 0.0);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = -alpha * w[j] * v[j];
    return out;
}

double RegLogistic::upper_value(const RealVec& w, const RealVec&) const {
    double v = 0.0;
    for (std::int64_t i = 0; i < val_.n; ++i)
        v += psi(val_.y[static_cast<std::size_t>(i)] * dot(val_.row(i), w));
    return v;
}

RealVec RegLogistic::upper_grad1(const RealVec& w, const RealVec&) const {
    RealVec g(w.size(), 0.0);
    for (std::int64_t i = 0; i < val_.n; ++i) {
        const auto row = val_.row(i);
        const double y = val_.y[static_cast<std::size_t>(i)];
        axpy(psi_d1(y * dot(row, w)) * y, row, g);
    }
    return g;
}

RealVec RegLogistic::upper_grad2(const RealVec&, const RealVec&) const {
    return zeros(static_cast<std::size_t>(dim_lambda()));
}

ProblemConstants RegLogistic::constants(const RealVec& lam) const {
    const StepConstants sc = step_constants(lam);
    ProblemConstants c;
    c.q = sc.q;
    c.L_E = sum_norm_val_;  // |psi'| <= 1
    c.mu1 = 0.25 * gram_norm_val_;
    c.mu2 = 0.0;
    c.nu1 = sc.alpha * kMaxPsiD3 * sum_norm3_tr_;
    c.nu2 = sc.alpha;
    c.m2 = 0.0;  // separable: the lam-Jacobian is deterministic

    const RealVec w_lam = solve_fixed_point(lam, 1e-10);
    if (reg_mode_ == RegMode::Single) {
        c.L_Phi = sc.alpha * norm2(w_lam);
    } else {
        double mx = 0.0;
        for (double v : w_lam) mx = std::max(mx, std::fabs(v));
        c.L_Phi = sc.alpha * mx;
    }

    // worst-case minibatch curvature: data Hessian norm of a sum-scaled
    // batch is at most n * max_i ||x_i||^2 / 4
    const RealVec reg = reg_diag(lam);
    const double reg_max = *std::max_element(reg.begin(), reg.end());
    const double batch_l = reg_max + static_cast<double>(train_.n) * max_row_sq_tr_ / 4.0;
    c.L_PhiTilde = std::max(std::fabs(1.0 - sc.alpha * sc.tau), std::fabs(sc.alpha * batch_l - 1.0));

    // exact sampler variance at the fixed point (iid with replacement)
    double sum_sq = 0.0;
    RealVec g_data(w_lam.size(), 0.0);
    for (std::int64_t i = 0; i < train_.n; ++i) {
        const auto row = train_.row(i);
        const double y = train_.y[static_cast<std::size_t>(i)];
        const double coef = psi_d1(y * dot(row, w_lam)) * y;
        sum_sq += coef * coef * dot(row, row);
        axpy(coef, row, g_data);
    }
    const double n = static_cast<double>(train_.n);
    const double b = static_cast<double>(sampler_.batch_size());
    const double var_grad = std::max(0.0, (n / b) * sum_sq - dot(g_data, g_data) / b);
    c.sigma_lam1 = 2.0 * sc.alpha * sc.alpha * var_grad;
    c.sigma1_lower = c.sigma_lam1;
    c.sigma2_lower = 0.0;  // Lipschitz losses: variance model without the w term
    c.sigma_lam2 = 2.0 * (c.L_PhiTilde * c.L_PhiTilde + sc.q * sc.q) / ((1.0 - sc.q) * (1.0 - sc.q));
    if (sampler_.mode() == SamplerMode::EpochShuffle) c.mark_estimated("sigma_lam1");
    return c;
}

RealVec RegLogistic::solve_fixed_point(const RealVec& lam, double tol, std::int64_t max_iters) const {
    RealVec w(static_cast<std::size_t>(train_.d), 0.0);
    for (std::int64_t it = 0; it < max_iters; ++it) {
        RealVec next = phi_mean(w, lam);
        double gap = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double dd = next[j] - w[j];
            gap += dd * dd;
        }
        w = std::move(next);
        if (std::sqrt(gap) <= tol) return w;
    }
    throw std::runtime_error("logistic: fixed-point solve did not reach tolerance");
}

double RegLogistic::accuracy(const RealVec& w, const Dataset& ds) const {
    std::int64_t correct = 0;
    for (std::int64_t i = 0; i < ds.n; ++i) {
        const int pred = dot(ds.row(i), w) >= 0.0 ? +1 : -1;
        if (pred == ds.y[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ds.n);
}

RegLogistic logistic_problem(Dataset train, Dataset val, RegMode reg_mode, std::int64_t batch_size,
                             SamplerMode sampler_mode, std::uint64_t sampler_seed) {
    return {std::move(train), std::move(val), reg_mode, batch_size, sampler_mode, sampler_seed};
}

StepConstants logistic_constants(const RegLogistic& problem, const RealVec& lam) {
    return problem.step_constants(lam);
}

}  // namespace hypergrad
