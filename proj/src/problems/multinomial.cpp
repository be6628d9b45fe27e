#include "hypergrad/problems/multinomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypergrad {

namespace {

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

// softmax of logits, in place, returning log-sum-exp
double softmax_inplace(RealVec& z) {
    double mx = z[0];
    for (double v : z) mx = std::max(mx, v);
    double s = 0.0;
    for (double& v : z) {
        v = std::exp(v - mx);
        s += v;
    }
    for (double& v : z) v /= s;
    return mx + std::log(s);
}

}  // namespace

MultinomialLogistic::MultinomialLogistic(Dataset train, Dataset val, int n_classes, RegMode reg_mode,
                                         std::int64_t batch_size, SamplerMode sampler_mode,
                                         std::uint64_t sampler_seed)
    : train_(std::move(train)),
      val_(std::move(val)),
      n_classes_(n_classes),
      reg_mode_(reg_mode),
      sampler_(train_.n, batch_size, sampler_mode, sampler_seed) {
    if (n_classes_ < 2) throw std::invalid_argument("multinomial_problem: need at least 2 classes");
    if (val_.d != train_.d) throw std::invalid_argument("multinomial_problem: train/val dimension mismatch");
    for (const Dataset* ds : {&train_, &val_})
        for (int y : ds->y)
            if (y < 0 || y >= n_classes_)
                throw std::invalid_argument("multinomial_problem: label out of 0..n_classes-1");
    gram_norm_tr_ = gram_norm(train_);
    gram_norm_val_ = gram_norm(val_);
    for (std::int64_t i = 0; i < val_.n; ++i) sum_norm_val_ += norm2(val_.row(i));
    for (std::int64_t i = 0; i < train_.n; ++i) {
        const double nn = norm2(train_.row(i));
        sum_norm3_tr_ += nn * nn * nn;
        max_row_sq_tr_ = std::max(max_row_sq_tr_, nn * nn);
    }
}

RealVec MultinomialLogistic::reg_weights(const RealVec& lam) const {
    const std::size_t d = static_cast<std::size_t>(train_.d);
    if (reg_mode_ == RegMode::Single) {
        if (lam.size() != 1) throw std::invalid_argument("multinomial: lambda must be scalar in Single mode");
        return RealVec(d, lam[0]);
    }
    if (lam.size() != d) throw std::invalid_argument("multinomial: lambda dimension must match features");
    return lam;
}

StepConstants MultinomialLogistic::step_constants(const RealVec& lam) const {
    const RealVec reg = reg_weights(lam);
    double lo = reg[0], hi = reg[0];
    for (double v : reg) {
        if (v <= 0.0) throw std::invalid_argument("multinomial: regularization parameters must be positive");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    StepConstants c;
    c.tau = lo;
    c.L = hi + 0.5 * gram_norm_tr_;  // softmax Hessian norm is at most 1/2
    c.alpha = 2.0 / (c.L + c.tau);
    c.q = (c.L - c.tau) / (c.L + c.tau);
    return c;
}

void MultinomialLogistic::add_data_grad(const Dataset& ds, const std::int64_t* idx, std::int64_t count,
                                        double scale_f, const RealVec& w, RealVec& out) const {
    const std::int64_t d = ds.d;
    const int c = n_classes_;
    RealVec p(static_cast<std::size_t>(c));
    for (std::int64_t r = 0; r < count; ++r) {
        const std::int64_t i = idx ? idx[r] : r;
        const auto row = ds.row(i);
        for (int a = 0; a < c; ++a) p[static_cast<std::size_t>(a)] = dot({w.data() + a * d, static_cast<std::size_t>(d)}, row);
        softmax_inplace(p);
        p[static_cast<std::size_t>(ds.y[static_cast<std::size_t>(i)])] -= 1.0;
        for (int a = 0; a < c; ++a) {
            const double coef = scale_f * p[static_cast<std::size_t>(a)];
            if (coef == 0.0) continue;
            double* dst = out.data() + a * d;
            for (std::int64_t j = 0; j < d; ++j) dst[j] += coef * row[static_cast<std::size_t>(j)];
        }
    }
}

void MultinomialLogistic::add_data_hvp(const Dataset& ds, const std::int64_t* idx, std::int64_t count,
                                       double scale_f, const RealVec& w, const RealVec& v,
                                       RealVec& out) const {
    const std::int64_t d = ds.d;
    const int c = n_classes_;
    RealVec p(static_cast<std::size_t>(c)), u(static_cast<std::size_t>(c));
    for (std::int64_t r = 0; r < count; ++r) {
        const std::int64_t i = idx ? idx[r] : r;
        const auto row = ds.row(i);
        for (int a = 0; a < c; ++a) {
            p[static_cast<std::size_t>(a)] = dot({w.data() + a * d, static_cast<std::size_t>(d)}, row);
            u[static_cast<std::size_t>(a)] = dot({v.data() + a * d, static_cast<std::size_t>(d)}, row);
        }
        softmax_inplace(p);
        double s = 0.0;
        for (int a = 0; a < c; ++a) s += p[static_cast<std::size_t>(a)] * u[static_cast<std::size_t>(a)];
        for (int a = 0; a < c; ++a) {
            const double coef = scale_f * p[static_cast<std::size_t>(a)] * (u[static_cast<std::size_t>(a)] - s);
            if (coef == 0.0) continue;
            double* dst = out.data() + a * d;
            for (std::int64_t j = 0; j < d; ++j) dst[j] += coef * row[static_cast<std::size_t>(j)];
        }
    }
}

RealVec MultinomialLogistic::lower_grad(const RealVec& w, const RealVec& lam) const {
    const RealVec reg = reg_weights(lam);
    RealVec g(w.size(), 0.0);
    add_data_grad(train_, nullptr, train_.n, 1.0, w, g);
    const std::int64_t d = train_.d;
    for (int a = 0; a < n_classes_; ++a)
        for (std::int64_t j = 0; j < d; ++j)
            g[static_cast<std::size_t>(a * d + j)] += reg[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(a * d + j)];
    return g;
}

RealVec MultinomialLogistic::phi_mean(const RealVec& w, const RealVec& lam) const {
    const double alpha = step_constants(lam).alpha;
    RealVec g = lower_grad(w, lam);
    RealVec out(w);
    axpy(-alpha, g, out);
    return out;
}

RealVec MultinomialLogistic::phi_sample(const RealVec& w, const RealVec& lam, const SampleKey& key) const {
    const RealVec reg = reg_weights(lam);
    const double alpha = step_constants(lam).alpha;
    const auto idx = sampler_.draw(key);
    const double scale_n = static_cast<double>(train_.n) / static_cast<double>(idx.size());
    RealVec g(w.size(), 0.0);
    add_data_grad(train_, idx.data(), static_cast<std::int64_t>(idx.size()), scale_n, w, g);
    const std::int64_t d = train_.d;
    for (int a = 0; a < n_classes_; ++a)
        for (std::int64_t j = 0; j < d; ++j)
            g[static_cast<std::size_t>(a * d + j)] += reg[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(a * d + j)];
    RealVec out(w);
    axpy(-alpha, g, out);
    return out;
}

RealVec MultinomialLogistic::jvp1_t_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const {
    const RealVec reg = reg_weights(lam);
    const double alpha = step_constants(lam).alpha;
    RealVec hv(v.size(), 0.0);
    add_data_hvp(train_, nullptr, train_.n, 1.0, w, v, hv);
    const std::int64_t d = train_.d;
    RealVec out(v);
    for (int a = 0; a < n_classes_; ++a)
        for (std::int64_t j = 0; j < d; ++j) {
            const auto ix = static_cast<std::size_t>(a * d + j);
            out[ix] -= alpha * (hv[ix] + reg[static_cast<std::size_t>(j)] * v[ix]);
        }
    return out;
}

RealVec MultinomialLogistic::jvp1_t_sample(const RealVec& w, const RealVec& lam, const SampleKey& key,
                                           const RealVec& v) const {
    const RealVec reg = reg_weights(lam);
    const double alpha = step_constants(lam).alpha;
    const auto idx = sampler_.draw(key);
    const double scale_n = static_cast<double>(train_.n) / static_cast<double>(idx.size());
    RealVec hv(v.size(), 0.0);
    add_data_hvp(train_, idx.data(), static_cast<std::int64_t>(idx.size()), scale_n, w, v, hv);
    const std::int64_t d = train_.d;
    RealVec out(v);
    for (int a = 0; a < n_classes_; ++a)
        for (std::int64_t j = 0; j < d; ++j) {
            const auto ix = static_cast<std::size_t>(a * d + j);
            out[ix] -= alpha * (hv[ix] + reg[static_cast<std::size_t>(j)] * v[ix]);
        }
    return out;
}

RealVec MultinomialLogistic::jvp2_t_mean(const RealVec& w, const RealVec& lam, const RealVec& v) const {
    const double alpha = step_constants(lam).alpha;
    if (reg_mode_ == RegMode::Single) return {-alpha * dot(w, v)};
    const std::int64_t d = train_.d;
    RealVec out(static_cast<std::size_t>(d), 0.0);
    for (int a = 0; a < n_classes_; ++a)
        for (std::int64_t j = 0; j < d; ++j)
            out[static_cast<std::size_t>(j)] -=
                alpha * w[static_cast<std::size_t>(a * d + j)] * v[static_cast<std::size_t>(a * d + j)];
    return out;
}

double MultinomialLogistic::upper_value(const RealVec& w, const RealVec&) const {
    const std::int64_t d = val_.d;
    const int c = n_classes_;
    RealVec z(static_cast<std::size_t>(c));
    double loss = 0.0;
    for (std::int64_t i = 0; i < val_.n; ++i) {
        const auto row = val_.row(i);
        for (int a = 0; a < c; ++a) z[static_cast<std::size_t>(a)] = dot({w.data() + a * d, static_cast<std::size_t>(d)}, row);
        const double y_logit = z[static_cast<std::size_t>(val_.y[static_cast<std::size_t>(i)])];
        const double lse = softmax_inplace(z);
        loss += lse - y_logit;
    }
    return loss;
}

RealVec MultinomialLogistic::upper_grad1(const RealVec& w, const RealVec&) const {
    RealVec g(w.size(), 0.0);
    add_data_grad(val_, nullptr, val_.n, 1.0, w, g);
    return g;
}

RealVec MultinomialLogistic::upper_grad2(const RealVec&, const RealVec&) const {
    return zeros(static_cast<std::size_t>(dim_lambda()));
}

ProblemConstants MultinomialLogistic::constants(const RealVec& lam) const {
    const StepConstants sc = step_constants(lam);
    ProblemConstants c;
    c.q = sc.q;
    c.L_E = M_SQRT2 * sum_norm_val_;  // ||p - e_y|| <= sqrt(2)
    c.mu1 = 0.5 * gram_norm_val_;
    c.mu2 = 0.0;
    c.nu1 = sc.alpha * sum_norm3_tr_;  // coarse softmax third-derivative bound
    c.nu2 = sc.alpha;
    c.m2 = 0.0;

    const RealVec w_lam = solve_fixed_point(lam, 1e-10);
    if (reg_mode_ == RegMode::Single) {
        c.L_Phi = sc.alpha * norm2(w_lam);
    } else {
        const std::int64_t d = train_.d;
        double mx = 0.0;
        for (std::int64_t j = 0; j < d; ++j) {
            double col = 0.0;
            for (int a = 0; a < n_classes_; ++a) {
                const double v = w_lam[static_cast<std::size_t>(a * d + j)];
                col += v * v;
            }
            mx = std::max(mx, col);
        }
        c.L_Phi = sc.alpha * std::sqrt(mx);
    }

    const RealVec reg = reg_weights(lam);
    const double reg_max = *std::max_element(reg.begin(), reg.end());
    const double batch_l = reg_max + static_cast<double>(train_.n) * max_row_sq_tr_ / 2.0;
    c.L_PhiTilde = std::max(std::fabs(1.0 - sc.alpha * sc.tau), std::fabs(sc.alpha * batch_l - 1.0));

    double sum_sq = 0.0;
    RealVec g_data(w_lam.size(), 0.0);
    {
        RealVec gi(w_lam.size(), 0.0);
        for (std::int64_t i = 0; i < train_.n; ++i) {
            std::fill(gi.begin(), gi.end(), 0.0);
            add_data_grad(train_, &i, 1, 1.0, w_lam, gi);
            sum_sq += dot(gi, gi);
            for (std::size_t j = 0; j < gi.size(); ++j) g_data[j] += gi[j];
        }
    }
    const double n = static_cast<double>(train_.n);
    const double b = static_cast<double>(sampler_.batch_size());
    const double var_grad = std::max(0.0, (n / b) * sum_sq - dot(g_data, g_data) / b);
    c.sigma_lam1 = 2.0 * sc.alpha * sc.alpha * var_grad;
    c.sigma1_lower = c.sigma_lam1;
    c.sigma2_lower = 0.0;
    c.sigma_lam2 = 2.0 * (c.L_PhiTilde * c.L_PhiTilde + sc.q * sc.q) / ((1.0 - sc.q) * (1.0 - sc.q));
    c.mark_estimated("nu1");
    return c;
}

RealVec MultinomialLogistic::solve_fixed_point(const RealVec& lam, double tol, std::int64_t max_iters) const {
    RealVec w(static_cast<std::size_t>(dim_w()), 0.0);
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
    throw std::runtime_error("multinomial: fixed-point solve did not reach tolerance");
}

double MultinomialLogistic::accuracy(const RealVec& w, const Dataset& ds) const {
    const std::int64_t d = ds.d;
    std::int64_t correct = 0;
    for (std::int64_t i = 0; i < ds.n; ++i) {
        const auto row = ds.row(i);
        int best = 0;
        double best_z = dot({w.data(), static_cast<std::size_t>(d)}, row);
        for (int a = 1; a < n_classes_; ++a) {
            const double z = dot({w.data() + a * d, static_cast<std::size_t>(d)}, row);
            if (z > best_z) {
                best_z = z;
                best = a;
            }
        }
        if (best == ds.y[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ds.n);
}

MultinomialLogistic multinomial_problem(Dataset train, Dataset val, int n_classes, RegMode reg_mode,
                                        std::int64_t batch_size, SamplerMode sampler_mode,
                                        std::uint64_t sampler_seed) {
    return {std::move(train), std::move(val), n_classes, reg_mode, batch_size, sampler_mode, sampler_seed};
}

}  // namespace hypergrad
