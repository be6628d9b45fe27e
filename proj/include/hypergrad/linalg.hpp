#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace hypergrad {

/// Dense real vector. Dimension is fixed by the problem that owns it;
/// entries are expected to stay finite (see all_finite).
using RealVec = std::vector<double>;

inline bool all_finite(std::span<const double> x) {
    for (double v : x) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

inline double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

inline double sq_dist(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

/// y += a * x
inline void axpy(double a, std::span<const double> x, RealVec& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline void scale(RealVec& x, double a) {
    for (double& v : x) v *= a;
}

inline RealVec zeros(std::size_t n) { return RealVec(n, 0.0); }

/// Row-major dense matrix, sized once at construction.
struct DenseMatrix {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::int64_t r, std::int64_t c) : rows(r), cols(c), data(static_cast<std::size_t>(r * c), 0.0) {}

    double& operator()(std::int64_t i, std::int64_t j) { return data[static_cast<std::size_t>(i * cols + j)]; }
    double operator()(std::int64_t i, std::int64_t j) const { return data[static_cast<std::size_t>(i * cols + j)]; }

    std::span<const double> row(std::int64_t i) const {
        return {data.data() + i * cols, static_cast<std::size_t>(cols)};
    }
};

inline RealVec matvec(const DenseMatrix& a, std::span<const double> x) {
    RealVec y(static_cast<std::size_t>(a.rows), 0.0);
    for (std::int64_t i = 0; i < a.rows; ++i) y[static_cast<std::size_t>(i)] = dot(a.row(i), x);
    return y;
}

inline RealVec matvec_t(const DenseMatrix& a, std::span<const double> x) {
    RealVec y(static_cast<std::size_t>(a.cols), 0.0);
    for (std::int64_t i = 0; i < a.rows; ++i) axpy(x[static_cast<std::size_t>(i)], a.row(i), y);
    return y;
}

/// Largest eigenvalue of a symmetric PSD operator by power iteration,
/// stopping once the Rayleigh quotient stabilizes.
template <typename Op>
double power_iteration_sym(Op&& op, std::int64_t dim, int iters = 5000, double rel_tol = 1e-13) {
    RealVec v(static_cast<std::size_t>(dim), 1.0);
    if (!v.empty()) v[0] = 1.3;  // break symmetry
    double lam = 0.0;
    for (int it = 0; it < iters; ++it) {
        RealVec u = op(v);
        const double nu = norm2(u);
        if (nu == 0.0) return 0.0;
        const double next = dot(u, v) / dot(v, v);
        scale(u, 1.0 / nu);
        v = std::move(u);
        if (it > 0 && std::fabs(next - lam) <= rel_tol * std::fabs(next)) return next;
        lam = next;
    }
    return lam;
}

/// Solves a x = b by Gaussian elimination with partial pivoting.
/// Intended for the small systems that appear in closed-form oracles.
inline RealVec solve_dense(DenseMatrix a, RealVec b) {
    if (a.rows != a.cols || a.rows != static_cast<std::int64_t>(b.size()))
        throw std::invalid_argument("solve_dense: shape mismatch");
    const std::int64_t n = a.rows;
    for (std::int64_t col = 0; col < n; ++col) {
        std::int64_t piv = col;
        for (std::int64_t r = col + 1; r < n; ++r)
            if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
        if (std::fabs(a(piv, col)) < 1e-300) throw std::runtime_error("solve_dense: singular matrix");
        if (piv != col) {
            for (std::int64_t j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
            std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
        }
        for (std::int64_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (std::int64_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    RealVec x(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t i = n - 1; i >= 0; --i) {
        double s = b[static_cast<std::size_t>(i)];
        for (std::int64_t j = i + 1; j < n; ++j) s -= a(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = s / a(i, i);
    }
    return x;
}

}  // namespace hypergrad
