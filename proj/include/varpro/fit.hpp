#pragma once

// Variable projection: the model is linear in a and nonlinear in b, so for
// fixed b the best a comes from an exact weighted linear least squares and
// the outer optimization only has to search over b. The reduced objective is
//
//   g(b) = |A(b) a(b) - z|^2  (+ prior penalty when configured)
//
// with A(b)[i][j] = f_j(x_i, b)/dy_i and z[i] = y_i/dy_i. The chi^2 is the
// squared 2-norm of the weighted residual; a squared-1-norm variant is kept
// behind Chi2Convention for comparisons against software that computed it
// that way.

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "varpro/errors.hpp"
#include "varpro/linalg.hpp"
#include "varpro/model.hpp"
#include "varpro/newton.hpp"
#include "varpro/numdiff.hpp"
#include "varpro/prior.hpp"

namespace varpro {

struct DataPoint {
    double x, y, dy;

    DataPoint(double x_, double y_, double dy_) : x(x_), y(y_), dy(dy_) {
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(dy)) {
            throw ValueError("DataPoint: non-finite field");
        }
        if (!(dy > 0.0)) throw ValueError("DataPoint: dy must be > 0");
    }
};

class Dataset {
  public:
    explicit Dataset(std::vector<DataPoint> points) : pts_(std::move(points)) {
        if (pts_.empty()) throw ValueError("Dataset: needs at least one point");
    }

    std::size_t size() const noexcept { return pts_.size(); }
    const DataPoint& operator[](std::size_t i) const { return pts_[i]; }
    const std::vector<DataPoint>& points() const noexcept { return pts_; }

  private:
    std::vector<DataPoint> pts_;
};

enum class Chi2Convention {
    sum_of_squares,    // |r|_2^2
    one_norm_squared,  // (sum |r_i|)^2, compatibility only
};

struct FitProblem {
    Dataset data;
    ModelBasis basis;
    Vector b0;
    std::optional<GaussianPrior> prior;
    OptimizerSettings settings = OptimizerSettings::for_fit();
    Chi2Convention chi2_convention = Chi2Convention::sum_of_squares;
};

struct FitResult {
    Vector a;               // linear coefficients at the optimum
    Vector b;               // nonlinear coefficients at the optimum
    double chi2 = 0.0;      // data term only
    double chi2_augmented = 0.0;  // chi2 + prior penalty: the minimized quantity
    Matrix hessian;         // of g at b, n_b x n_b
    std::size_t n_points = 0;
    std::size_t n_params = 0;  // n_a + n_b
    // diagnostics from the optimizer
    std::size_t iterations = 0;
    std::size_t descent_reversions = 0;
    std::vector<double> accepted_objectives;
};

// N x n_a weighted design matrix, entry (i, j) = f_j(x_i, b)/dy_i.
inline Matrix design_matrix(const ModelBasis& basis, const Dataset& data, const Vector& b) {
    if (b.size() != basis.n_b() && !(basis.n_b() == 0 && b.size() >= 1)) {
        throw LengthError("design_matrix: b length does not match the basis");
    }
    const std::size_t n = data.size();
    const std::size_t na = basis.n_a();
    std::vector<double> e(n * na);
    for (std::size_t i = 0; i < n; ++i) {
        const DataPoint& p = data[i];
        for (std::size_t j = 0; j < na; ++j) {
            double v;
            try {
                v = basis.evaluate(j, b, p.x) / p.dy;
            } catch (const EvaluationError& err) {
                std::ostringstream os;
                os << "design_matrix: row " << i << ", column " << j << ": " << err.what();
                throw EvaluationError(os.str(), i, j);
            }
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "design_matrix: non-finite entry at row " << i << ", column " << j;
                throw EvaluationError(os.str(), i, j);
            }
            e[i * na + j] = v;
        }
    }
    return Matrix(n, na, std::move(e));
}

// z_i = y_i / dy_i.
inline Vector weighted_target(const Dataset& data) {
    std::vector<double> z(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) z[i] = data[i].y / data[i].dy;
    return Vector(std::move(z));
}

struct LinearFit {
    Vector a;
    double chi2;
};

// Exact inner solve: a from the normal equations (A^T A) a = A^T z, and the
// chi^2 of the weighted residual under the requested convention.
inline LinearFit linear_solve(const ModelBasis& basis, const Dataset& data, const Vector& b,
                              Chi2Convention convention = Chi2Convention::sum_of_squares) {
    if (data.size() < basis.n_a()) {
        throw InvalidProblemError("linear_solve: fewer points than basis functions");
    }
    const Matrix a_mat = design_matrix(basis, data, b);
    const Vector z = weighted_target(data);

    const Matrix at = transpose(a_mat);
    const Matrix normal = at * a_mat;
    const Vector rhs = matvec(at, z);

    Vector a;
    try {
        a = solve_spd(normal, rhs);
    } catch (const SingularMatrixError& e) {
        std::ostringstream os;
        os << "linear_solve: normal equations singular (basis degenerate at b = [";
        for (std::size_t i = 0; i < b.size(); ++i) os << (i ? ", " : "") << b[i];
        os << "]): " << e.what();
        throw SingularNormalEquationsError(os.str(), b.entries());
    }

    const Vector r = matvec(a_mat, a) - z;
    double chi2 = 0.0;
    if (convention == Chi2Convention::sum_of_squares) {
        for (std::size_t i = 0; i < r.size(); ++i) chi2 += r[i] * r[i];
    } else {
        const double n1 = one_norm(r);
        chi2 = n1 * n1;
    }
    return {std::move(a), chi2};
}

namespace detail {

inline void validate_problem(const FitProblem& p) {
    if (p.basis.n_b() == 0) {
        throw InvalidProblemError(
            "fit: purely linear model (n_b == 0); use linear_solve directly");
    }
    if (p.b0.size() != p.basis.n_b()) {
        throw InvalidProblemError("fit: b0 length does not match basis n_b");
    }
    if (p.prior && p.prior->size() != p.basis.n_b()) {
        throw InvalidProblemError("fit: prior length does not match basis n_b");
    }
    if (p.data.size() < p.basis.n_a()) {
        throw InvalidProblemError("fit: fewer data points than basis functions");
    }
    p.settings.validate();
}

}  // namespace detail

// g(b): the minimum-over-a chi^2 at fixed b, plus the prior penalty when the
// problem carries one. This is the function handed to the Newton optimizer.
// The problem is captured by value so the field stays valid on its own.
inline ScalarField reduced_objective(const FitProblem& problem) {
    detail::validate_problem(problem);
    return [problem](const Vector& b) -> double {
        double value = linear_solve(problem.basis, problem.data, b, problem.chi2_convention).chi2;
        if (problem.prior) value += problem.prior->penalty(b);
        return value;
    };
}

// Full fit: minimize g over b starting at b0, then re-solve the linear part
// at the optimal b. Optimizer failures propagate with the iterate attached.
inline FitResult fit(const FitProblem& problem) {
    detail::validate_problem(problem);
    const ScalarField g = reduced_objective(problem);
    const OptimumReport opt = minimize(g, problem.b0, problem.settings);

    const LinearFit lin =
        linear_solve(problem.basis, problem.data, opt.x_min, problem.chi2_convention);

    FitResult out;
    out.a = lin.a;
    out.b = opt.x_min;
    out.chi2 = lin.chi2;
    out.chi2_augmented = lin.chi2 + (problem.prior ? problem.prior->penalty(opt.x_min) : 0.0);
    out.hessian = opt.hessian_at_min;
    out.n_points = problem.data.size();
    out.n_params = problem.basis.n_a() + problem.basis.n_b();
    out.iterations = opt.iterations_used;
    out.descent_reversions = opt.descent_reversions;
    out.accepted_objectives = opt.accepted_objectives;
    return out;
}

// Curvature-based one-sigma uncertainties on b: sqrt(2 * (H^-1)_ii), the
// delta-chi^2 = 1 convention applied to the Hessian of g at the optimum.
inline Vector parameter_errors(const FitResult& result) {
    const std::size_t n = result.b.size();
    std::vector<double> err(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> unit(n, 0.0);
        unit[i] = 1.0;
        Vector col;
        try {
            col = solve_spd(result.hessian, Vector(std::move(unit)));
        } catch (const SingularMatrixError& e) {
            throw OptimizeError(ErrorCode::singular_hessian,
                                std::string("parameter_errors: ") + e.what());
        }
        const double var = 2.0 * col[i];
        if (!(var > 0.0)) {
            throw OptimizeError(ErrorCode::singular_hessian,
                                "parameter_errors: Hessian not positive definite at the optimum");
        }
        err[i] = std::sqrt(var);
    }
    return Vector(std::move(err));
}

}  // namespace varpro
