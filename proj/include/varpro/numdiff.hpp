#pragma once

// Central finite differences for scalar functions of a vector. The step is
// absolute (not relative to |x_i|) and defaults to 1e-4; both choices are
// load-bearing for reproducing the optimizer's iterate trajectories.
//
// The Hessian entry (r, c) is the nested first difference: the step-h central
// difference in coordinate c of the step-h central-difference partial in
// coordinate r. Diagonal entries therefore effectively use a 2h stencil. The
// computed Hessian is handed on without symmetrization.

#include <cstddef>
#include <functional>
#include <vector>

#include "varpro/linalg.hpp"

namespace varpro {

inline constexpr double kDefaultFdStep = 1e-4;

using ScalarField = std::function<double(const Vector&)>;

// d f / d x_i as a function: x -> (f(x + h e_i) - f(x - h e_i)) / (2h).
// The caller's vector is never modified; perturbation happens on a copy.
template <typename F>
auto partial(F f, std::size_t i, double h = kDefaultFdStep) {
    return [f = std::move(f), i, h](const Vector& x) -> double {
        std::vector<double> w = x.entries();
        w[i] += h;
        const double u = f(Vector(w));
        w[i] -= 2.0 * h;
        const double v = f(Vector(w));
        return (u - v) / 2.0 / h;
    };
}

template <typename F>
Vector gradient(const F& f, const Vector& x, double h = kDefaultFdStep) {
    std::vector<double> g(x.size());
    for (std::size_t r = 0; r < x.size(); ++r) g[r] = partial(std::cref(f), r, h)(x);
    return Vector(std::move(g));
}

template <typename F>
Matrix hessian(const F& f, const Vector& x, double h = kDefaultFdStep) {
    const std::size_t n = x.size();
    std::vector<double> e(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        auto df_r = partial(std::cref(f), r, h);
        for (std::size_t c = 0; c < n; ++c) e[r * n + c] = partial(df_r, c, h)(x);
    }
    return Matrix(n, n, std::move(e));
}

}  // namespace varpro
