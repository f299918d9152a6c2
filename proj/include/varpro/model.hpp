#pragma once

// Separable model f(x, a, b) = sum_j a_j * f_j(x, b): an ordered basis of
// nonlinear-parameterized functions. A basis function reads only b indices
// below its arity. Built-in families cover exponential sums exp(b_j * x)
// (with b carrying its own sign, so decaying data wants negative b) and the
// rational+polynomial trio {x, x^2, 1/(x+b0)}.

#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "varpro/errors.hpp"
#include "varpro/linalg.hpp"

namespace varpro {

struct BasisFunction {
    std::function<double(const Vector& b, double x)> eval;
    std::size_t arity_b = 0;
};

class ModelBasis {
  public:
    explicit ModelBasis(std::vector<BasisFunction> functions)
        : fns_(std::move(functions)) {
        if (fns_.empty()) throw ValueError("ModelBasis: needs at least one basis function");
        for (const auto& f : fns_) n_b_ = std::max(n_b_, f.arity_b);
    }

    std::size_t n_a() const noexcept { return fns_.size(); }
    std::size_t n_b() const noexcept { return n_b_; }
    const std::vector<BasisFunction>& functions() const noexcept { return fns_; }

    // Value of basis function j; non-finite results (poles, overflow) are
    // surfaced as EvaluationError rather than propagated as inf/NaN.
    double evaluate(std::size_t j, const Vector& b, double x) const {
        const double v = fns_[j].eval(b, x);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "basis function " << j << " non-finite at x=" << x;
            throw EvaluationError(os.str(), EvaluationError::npos, j);
        }
        return v;
    }

    // Full model value sum_j a_j f_j(x, b).
    double model_value(const Vector& a, const Vector& b, double x) const {
        if (a.size() != n_a()) throw LengthError("model_value: a length != n_a");
        double s = 0.0;
        for (std::size_t j = 0; j < fns_.size(); ++j) s += a[j] * evaluate(j, b, x);
        return s;
    }

  private:
    std::vector<BasisFunction> fns_;
    std::size_t n_b_ = 0;
};

// {x -> exp(b_j * x)} for j = 0..k-1; n_a = n_b = k.
inline ModelBasis exp_sum_basis(std::size_t k) {
    if (k < 1) throw ValueError("exp_sum_basis: k must be >= 1");
    std::vector<BasisFunction> fns;
    fns.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        fns.push_back({[j](const Vector& b, double x) { return std::exp(b[j] * x); }, j + 1});
    }
    return ModelBasis(std::move(fns));
}

// {x, x^2, 1/(x+b0)}; n_a = 3, n_b = 1.
inline ModelBasis example1_basis() {
    std::vector<BasisFunction> fns;
    fns.push_back({[](const Vector&, double x) { return x; }, 0});
    fns.push_back({[](const Vector&, double x) { return x * x; }, 0});
    fns.push_back({[](const Vector& b, double x) { return 1.0 / (x + b[0]); }, 1});
    return ModelBasis(std::move(fns));
}

}  // namespace varpro
