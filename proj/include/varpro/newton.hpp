#pragma once

// Multidimensional Newton minimizer with an adaptive steepest-descent
// fallback. Per iteration: finite-difference gradient and Hessian at the
// current point, propose x - H^-1 grad, and if that fails to decrease the
// objective revert and walk along -grad/|grad|_1 with step h, halving h after
// every trial until the objective decreases (ties accept). The step memory h
// persists across iterations and is reset to twice the accepted move;
// convergence requires at least three completed iterations and then
// h/2 < max(ap, |x|_1 * rp). Accepted objective values never increase.
//
// Objective failures (a varpro::Error, or a non-finite value) at a proposal
// or trial point count as "no decrease": the point is rejected and the
// halving loop continues. Failures at the starting point, and inside the
// gradient/Hessian evaluations at accepted points, propagate to the caller.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "varpro/errors.hpp"
#include "varpro/linalg.hpp"
#include "varpro/numdiff.hpp"

namespace varpro {

struct OptimizerSettings {
    double ap = 1e-6;                  // absolute precision target
    double rp = 1e-4;                  // relative precision target
    std::size_t ns = 20;               // max Newton iterations
    double h0 = 10.0;                  // initial steepest-descent step
    double fd_step = kDefaultFdStep;   // finite-difference step
    std::size_t max_backtracks = 200;  // halving guard per iteration
    bool record_trace = false;         // keep per-iteration iterates

    // Defaults for the full variable-projection fit (larger iteration budget).
    static OptimizerSettings for_fit() {
        OptimizerSettings s;
        s.ns = 200;
        return s;
    }

    void validate() const {
        if (!(ap > 0.0)) throw ConfigError("OptimizerSettings: ap must be > 0");
        if (!(rp > 0.0)) throw ConfigError("OptimizerSettings: rp must be > 0");
        if (ns < 1) throw ConfigError("OptimizerSettings: ns must be >= 1");
        if (!(h0 > 0.0)) throw ConfigError("OptimizerSettings: h0 must be > 0");
        if (!(fd_step > 0.0)) throw ConfigError("OptimizerSettings: fd_step must be > 0");
        if (max_backtracks < 1) throw ConfigError("OptimizerSettings: max_backtracks must be >= 1");
    }
};

struct IterationRecord {
    std::size_t k;           // 0-based iteration index
    Vector x;                // accepted iterate
    double fx;               // objective at x
    double h;                // step memory after the h = |move|*2 update
    std::size_t backtracks;  // descent trials taken this iteration
};

struct OptimumReport {
    Vector x_min;
    Matrix hessian_at_min;
    std::size_t iterations_used = 0;
    std::size_t descent_reversions = 0;  // total steepest-descent trial steps
    double objective_initial = 0.0;
    double objective_final = 0.0;
    // objective_initial followed by the accepted value of every completed
    // iteration; non-increasing by construction.
    std::vector<double> accepted_objectives;
    std::vector<IterationRecord> trace;  // filled when settings.record_trace
};

// Newton step: the d with hess*d = grad (the move is x - d).
inline Vector newton_step(const Vector& grad, const Matrix& hess) {
    if (hess.rows() != hess.cols() || hess.rows() != grad.size()) {
        throw ShapeError("newton_step: hessian/gradient shape mismatch");
    }
    try {
        return solve_spd(hess, grad);
    } catch (const SingularMatrixError& e) {
        throw OptimizeError(ErrorCode::singular_hessian,
                            std::string("newton_step: ") + e.what());
    }
}

namespace detail {

// Objective value at a proposal/trial point; +inf means rejected.
template <typename F>
double trial_value(const F& f, const Vector& x) {
    try {
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace detail

template <typename F>
OptimumReport minimize(const F& f, const Vector& x0, const OptimizerSettings& st = {}) {
    st.validate();

    double fx = f(x0);
    if (!std::isfinite(fx)) {
        throw EvaluationError("minimize: objective non-finite at the starting point");
    }

    Vector x = x0;
    double h = st.h0;
    std::size_t reversions = 0;

    OptimumReport report;
    report.objective_initial = fx;
    report.accepted_objectives.push_back(fx);

    for (std::size_t k = 0; k < st.ns; ++k) {
        const Vector grad = gradient(f, x, st.fd_step);
        const Matrix hess = hessian(f, x, st.fd_step);
        if (one_norm(hess) < st.ap) {
            throw OptimizeError(ErrorCode::unstable_solution,
                                "minimize: unstable solution (Hessian 1-norm below ap)",
                                x.entries(), k, fx);
        }

        Vector x_old = x;
        double fx_old = fx;
        Vector d;
        try {
            d = newton_step(grad, hess);
        } catch (const OptimizeError& e) {
            throw OptimizeError(e.code(), e.what(), x.entries(), k, fx);
        }
        x = x_old - d;
        fx = detail::trial_value(f, x);

        std::size_t backtracks = 0;
        while (fx > fx_old) {
            fx = fx_old;  // revert to the last accepted point
            x = x_old;
            if (backtracks == st.max_backtracks) {
                throw OptimizeError(ErrorCode::stalled_descent,
                                    "minimize: stalled descent (halving guard exhausted)",
                                    x.entries(), k, fx);
            }
            const double gn = one_norm(grad);
            std::vector<double> step(grad.size());
            for (std::size_t i = 0; i < grad.size(); ++i) step[i] = grad[i] / gn * h;
            x_old = x;
            x = x - Vector(std::move(step));
            fx_old = fx;
            fx = detail::trial_value(f, x);
            h = h / 2.0;
            ++backtracks;
            ++reversions;
        }

        h = one_norm(x - x_old) * 2.0;
        report.accepted_objectives.push_back(fx);
        if (st.record_trace) report.trace.push_back({k, x, fx, h, backtracks});

        if (k > 2 && h / 2.0 < std::max(st.ap, one_norm(x) * st.rp)) {
            report.x_min = x;
            report.hessian_at_min = hessian(f, x, st.fd_step);
            report.iterations_used = k + 1;
            report.descent_reversions = reversions;
            report.objective_final = fx;
            return report;
        }
    }
    throw OptimizeError(ErrorCode::no_convergence,
                        "minimize: no convergence within the iteration budget", x.entries(),
                        st.ns, fx);
}

}  // namespace varpro
