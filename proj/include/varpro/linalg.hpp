#pragma once

// Minimal dense linear algebra for desk-scale fitting problems: row-major
// Matrix, Vector, the matrix 1-norm used for convergence checks, and a
// symmetric solve with explicit singularity detection. Everything is double
// precision, value-semantic and immutable once built; no BLAS-grade kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "varpro/errors.hpp"

namespace varpro {

namespace detail {

inline void require_finite(const std::vector<double>& entries, const char* who) {
    for (double v : entries) {
        if (!std::isfinite(v)) {
            throw ValueError(std::string(who) + ": non-finite entry");
        }
    }
}

}  // namespace detail

class Vector {
  public:
    Vector() = default;

    explicit Vector(std::vector<double> entries) : e_(std::move(entries)) {
        if (e_.empty()) throw ValueError("Vector: length must be >= 1");
        detail::require_finite(e_, "Vector");
    }

    Vector(std::initializer_list<double> entries) : Vector(std::vector<double>(entries)) {}

    explicit Vector(std::size_t n, double fill = 0.0) : e_(n, fill) {
        if (n == 0) throw ValueError("Vector: length must be >= 1");
        detail::require_finite(e_, "Vector");
    }

    std::size_t size() const noexcept { return e_.size(); }
    double operator[](std::size_t i) const { return e_[i]; }
    const std::vector<double>& entries() const noexcept { return e_; }

    bool operator==(const Vector& o) const noexcept { return e_ == o.e_; }

  private:
    std::vector<double> e_;
};

class Matrix {
  public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), e_(std::move(entries)) {
        if (rows_ == 0 || cols_ == 0) throw ValueError("Matrix: rows and cols must be >= 1");
        if (e_.size() != rows_ * cols_) {
            throw ShapeError("Matrix: entry count does not match rows*cols");
        }
        detail::require_finite(e_, "Matrix");
    }

    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        if (rows_ == 0 || cols_ == 0) throw ValueError("Matrix: rows and cols must be >= 1");
        e_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
            e_.insert(e_.end(), r.begin(), r.end());
        }
        detail::require_finite(e_, "Matrix");
    }

    static Matrix identity(std::size_t n) {
        std::vector<double> e(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
        return Matrix(n, n, std::move(e));
    }

    static Matrix column(const Vector& v) {
        return Matrix(v.size(), 1, v.entries());
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t r, std::size_t c) const { return e_[r * cols_ + c]; }
    const std::vector<double>& entries() const noexcept { return e_; }

    bool operator==(const Matrix& o) const noexcept {
        return rows_ == o.rows_ && cols_ == o.cols_ && e_ == o.e_;
    }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> e_;
};

// Matrix 1-norm: max over columns of the column's sum of absolute entries.
// For a column vector this is the sum of absolute entries.
inline double one_norm(const Matrix& m) {
    double best = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) s += std::abs(m(r, c));
        best = std::max(best, s);
    }
    return best;
}

inline double one_norm(const Vector& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += std::abs(v[i]);
    return s;
}

inline Matrix transpose(const Matrix& m) {
    std::vector<double> e(m.rows() * m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) e[c * m.rows() + r] = m(r, c);
    return Matrix(m.cols(), m.rows(), std::move(e));
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        std::ostringstream os;
        os << "matmul: " << a.rows() << "x" << a.cols() << " * " << b.rows() << "x" << b.cols();
        throw ShapeError(os.str());
    }
    std::vector<double> e(a.rows() * b.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double ark = a(r, k);
            for (std::size_t c = 0; c < b.cols(); ++c) e[r * b.cols() + c] += ark * b(k, c);
        }
    }
    return Matrix(a.rows(), b.cols(), std::move(e));
}

inline Matrix operator*(const Matrix& a, const Matrix& b) { return matmul(a, b); }

inline Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) throw ShapeError("matvec: shape mismatch");
    std::vector<double> e(a.rows(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) e[r] += a(r, c) * x[c];
    return Vector(std::move(e));
}

inline Vector sub(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw ShapeError("sub: length mismatch");
    std::vector<double> e(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) e[i] = a[i] - b[i];
    return Vector(std::move(e));
}

inline Vector operator-(const Vector& a, const Vector& b) { return sub(a, b); }

inline Vector scale(const Vector& v, double s) {
    std::vector<double> e(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) e[i] = v[i] * s;
    return Vector(std::move(e));
}

inline Vector operator*(const Vector& v, double s) { return scale(v, s); }

namespace detail {

// Shared factorization workspace for solve_spd: either an unpivoted Cholesky
// (SPD inputs, the common case for normal equations) or a partially-pivoted
// LU fallback which also handles the indefinite finite-difference Hessians
// the Newton optimizer produces.
struct SymSolve {
    std::size_t n = 0;
    std::vector<double> f;       // packed factor
    std::vector<std::size_t> p;  // LU row permutation (identity for Cholesky)
    bool cholesky = false;

    static constexpr double kPivotRel = 1e-13;

    // Attempt LL^T; returns false when a pivot is non-positive or below
    // threshold relative to the matrix norm (indefinite or near-singular —
    // the LU fallback makes the final singularity call).
    bool try_cholesky(const Matrix& m, double norm_m) {
        n = m.rows();
        f.assign(n * n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            double d = m(j, j);
            for (std::size_t k = 0; k < j; ++k) d -= f[j * n + k] * f[j * n + k];
            if (!(d > kPivotRel * norm_m)) return false;
            const double ljj = std::sqrt(d);
            f[j * n + j] = ljj;
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = m(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= f[i * n + k] * f[j * n + k];
                f[i * n + j] = s / ljj;
            }
        }
        cholesky = true;
        return true;
    }

    void lu(const Matrix& m, double norm_m) {
        n = m.rows();
        f = m.entries();
        p.resize(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t piv = k;
            for (std::size_t i = k + 1; i < n; ++i)
                if (std::abs(f[i * n + k]) > std::abs(f[piv * n + k])) piv = i;
            if (std::abs(f[piv * n + k]) < kPivotRel * norm_m) {
                throw SingularMatrixError("solve_spd: pivot below threshold, matrix singular");
            }
            if (piv != k) {
                for (std::size_t c = 0; c < n; ++c) std::swap(f[k * n + c], f[piv * n + c]);
                std::swap(p[k], p[piv]);
            }
            for (std::size_t i = k + 1; i < n; ++i) {
                const double l = f[i * n + k] / f[k * n + k];
                f[i * n + k] = l;
                for (std::size_t c = k + 1; c < n; ++c) f[i * n + c] -= l * f[k * n + c];
            }
        }
        cholesky = false;
    }

    std::vector<double> solve(const std::vector<double>& rhs) const {
        std::vector<double> x(n);
        if (cholesky) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = rhs[i];
                for (std::size_t k = 0; k < i; ++k) s -= f[i * n + k] * x[k];
                x[i] = s / f[i * n + i];
            }
            for (std::size_t ii = n; ii-- > 0;) {
                double s = x[ii];
                for (std::size_t k = ii + 1; k < n; ++k) s -= f[k * n + ii] * x[k];
                x[ii] = s / f[ii * n + ii];
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                double s = rhs[p[i]];
                for (std::size_t k = 0; k < i; ++k) s -= f[i * n + k] * x[k];
                x[i] = s;
            }
            for (std::size_t ii = n; ii-- > 0;) {
                double s = x[ii];
                for (std::size_t k = ii + 1; k < n; ++k) s -= f[ii * n + k] * x[k];
                x[ii] = s / f[ii * n + ii];
            }
        }
        return x;
    }
};

}  // namespace detail

// Solve m*x = rhs for square m that is symmetric up to round-off (normal
// equations, finite-difference Hessians). Declares SingularMatrixError when a
// pivot falls below 1e-13 * one_norm(m) or the 1-norm condition estimate
// (via the explicitly formed inverse — matrices here are tiny) exceeds
// 1/(100*eps). Cholesky first; partially-pivoted LU when the input is
// indefinite or Cholesky-unstable.
inline Vector solve_spd(const Matrix& m, const Vector& rhs) {
    if (m.rows() != m.cols()) throw ShapeError("solve_spd: matrix not square");
    if (m.rows() != rhs.size()) throw ShapeError("solve_spd: rhs length mismatch");
    const std::size_t n = m.rows();
    const double nm = one_norm(m);
    if (nm == 0.0) throw SingularMatrixError("solve_spd: zero matrix");

    detail::SymSolve s;
    if (!s.try_cholesky(m, nm)) s.lu(m, nm);

    // cond_1(m) = |m|_1 * |m^-1|_1 from n unit solves
    double inv_norm = 0.0;
    std::vector<double> unit(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        unit[c] = 1.0;
        std::vector<double> col = s.solve(unit);
        unit[c] = 0.0;
        double colsum = 0.0;
        for (double v : col) colsum += std::abs(v);
        inv_norm = std::max(inv_norm, colsum);
    }
    const double cond = nm * inv_norm;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (!std::isfinite(cond) || cond > 1.0 / (100.0 * eps)) {
        throw SingularMatrixError("solve_spd: condition estimate exceeds 1/(100*eps)");
    }

    std::vector<double> x = s.solve(rhs.entries());
    for (double v : x) {
        if (!std::isfinite(v)) throw SingularMatrixError("solve_spd: non-finite solution");
    }
    return Vector(std::move(x));
}

}  // namespace varpro
