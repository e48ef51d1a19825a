#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ricci/chart.hpp"

namespace ricci {

/// Dense square matrix, row major. Sized for chart dimensions (d <= 14), so
/// no blocking or pivot scaling beyond plain partial pivoting is needed.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

    std::size_t size() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

inline Matrix multiply(const Matrix& x, const Matrix& y) {
    const std::size_t n = x.size();
    Matrix r(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            double xik = x(i, k);
            if (xik == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) r(i, j) += xik * y(k, j);
        }
    return r;
}

/// Gauss-Jordan inversion with partial pivoting. Returns the determinant;
/// when it returns exactly 0 the elimination hit a zero pivot column and
/// `inv` is not meaningful. Callers gate on their own singularity threshold.
inline double invert(Matrix a, Matrix& inv) {
    const std::size_t n = a.size();
    inv = Matrix(n);
    for (std::size_t i = 0; i < n; ++i) inv(i, i) = 1.0;
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (a(piv, col) == 0.0) return 0.0;
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
            det = -det;
        }
        const double p = a(col, col);
        det *= p;
        const double ip = 1.0 / p;
        for (std::size_t j = 0; j < n; ++j) {
            a(col, j) *= ip;
            inv(col, j) *= ip;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return det;
}

inline double determinant(const Matrix& m) {
    Matrix scratch;
    return invert(m, scratch);
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations. Plenty for
/// signature checks at chart dimensions.
inline std::vector<double> symmetric_eigenvalues(Matrix a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off <= 1e-28 * (1.0 + a.max_abs() * a.max_abs())) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    return eig;
}

inline int negative_eigenvalue_count(const Matrix& m) {
    int count = 0;
    for (double v : symmetric_eigenvalues(m))
        if (v < 0.0) ++count;
    return count;
}

} // namespace ricci
