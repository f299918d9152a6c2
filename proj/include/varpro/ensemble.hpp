#pragma once

// Batches of simulated experiments: generate with per-experiment seed
// base+k, fit, classify the outcome, apply the two-sigma prior filter.
// Individual fit failures are recorded as data; only a broken configuration
// aborts the batch. Outcomes are ordered by experiment index and the whole
// report is reproducible from the configuration alone.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "varpro/datagen.hpp"
#include "varpro/errors.hpp"
#include "varpro/fit.hpp"
#include "varpro/model.hpp"
#include "varpro/newton.hpp"
#include "varpro/prior.hpp"

namespace varpro {

enum class FitStatus {
    converged,
    no_convergence,
    unstable_solution,
    singular_hessian,
    stalled_descent,
    singular_normal_equations,
    evaluation_error,  // objective failed at the start point or inside derivatives
};

inline std::string_view to_string(FitStatus s) {
    switch (s) {
        case FitStatus::converged: return "converged";
        case FitStatus::no_convergence: return "no_convergence";
        case FitStatus::unstable_solution: return "unstable_solution";
        case FitStatus::singular_hessian: return "singular_hessian";
        case FitStatus::stalled_descent: return "stalled_descent";
        case FitStatus::singular_normal_equations: return "singular_normal_equations";
        case FitStatus::evaluation_error: return "evaluation_error";
    }
    return "unknown";
}

struct EnsembleConfig {
    std::size_t n_experiments = 0;
    ModelBasis truth;
    Vector a_true;
    Vector b_true;
    GridSpec grid;
    NoiseSpec noise;  // noise.seed is the base; experiment k runs on base+k
    GaussianPrior prior;
    Vector b0;
    OptimizerSettings settings = OptimizerSettings::for_fit();
    std::optional<double> dy_rel_override;
};

struct ExperimentOutcome {
    std::size_t index = 0;
    FitStatus status = FitStatus::converged;
    std::optional<FitResult> result;  // present iff converged
    bool retained = false;            // two-sigma verdict; meaningful iff converged
    std::string message;              // failure detail, empty when converged
};

struct EnsembleReport {
    std::vector<ExperimentOutcome> outcomes;
    double failure_rate = 0.0;  // (non-converged)/n
    // (experiment index, fitted b) for converged-and-retained experiments.
    std::vector<std::pair<std::size_t, Vector>> retained_b_table;

    std::size_t count(FitStatus s) const {
        std::size_t n = 0;
        for (const auto& o : outcomes) n += (o.status == s) ? 1 : 0;
        return n;
    }
};

namespace detail {

inline FitStatus classify(ErrorCode code) {
    switch (code) {
        case ErrorCode::no_convergence: return FitStatus::no_convergence;
        case ErrorCode::unstable_solution: return FitStatus::unstable_solution;
        case ErrorCode::singular_hessian: return FitStatus::singular_hessian;
        case ErrorCode::stalled_descent: return FitStatus::stalled_descent;
        case ErrorCode::singular_normal_equations: return FitStatus::singular_normal_equations;
        default: return FitStatus::evaluation_error;
    }
}

inline void validate_config(const EnsembleConfig& c) {
    if (c.n_experiments < 1) throw ConfigError("ensemble: n_experiments must be >= 1");
    if (c.a_true.size() != c.truth.n_a()) {
        throw ConfigError("ensemble: a_true length does not match the truth basis");
    }
    if (c.b_true.size() != c.truth.n_b()) {
        throw ConfigError("ensemble: b_true length does not match the truth basis");
    }
    if (c.b0.size() != c.truth.n_b()) {
        throw ConfigError("ensemble: b0 length does not match the truth basis");
    }
    if (c.prior.size() != c.truth.n_b()) {
        throw ConfigError("ensemble: prior length does not match the truth basis");
    }
    c.grid.validate();
    c.noise.validate();
    c.settings.validate();
}

}  // namespace detail

inline EnsembleReport run_ensemble(const EnsembleConfig& config) {
    detail::validate_config(config);

    EnsembleReport report;
    report.outcomes.reserve(config.n_experiments);
    std::size_t failures = 0;

    for (std::size_t k = 0; k < config.n_experiments; ++k) {
        NoiseSpec spec = config.noise;
        spec.seed = config.noise.seed + k;
        ExperimentOutcome outcome;
        outcome.index = k;
        try {
            const Dataset data = generate_experiment(config.truth, config.a_true, config.b_true,
                                                     config.grid, spec, config.dy_rel_override);
            FitProblem problem{data, config.truth, config.b0, config.prior, config.settings};
            FitResult res = fit(problem);
            outcome.status = FitStatus::converged;
            outcome.retained = config.prior.within_two_sigma(res.b);
            outcome.result = std::move(res);
        } catch (const ZeroUncertaintyError& e) {
            // configuration problem, not an experiment outcome
            throw ConfigError(std::string("ensemble: ") + e.what());
        } catch (const Error& e) {
            outcome.status = detail::classify(e.code());
            outcome.message = e.what();
            ++failures;
        }
        if (outcome.status == FitStatus::converged && outcome.retained) {
            report.retained_b_table.emplace_back(k, outcome.result->b);
        }
        report.outcomes.push_back(std::move(outcome));
    }
    report.failure_rate =
        static_cast<double>(failures) / static_cast<double>(config.n_experiments);
    return report;
}

// Parallel-coordinates table: one row per retained experiment, columns
// (experiment_index, b0, b1, ...). Consumers draw index-vs-value polylines.
// Raises EmptySelection when nothing was retained — deliberately distinct
// from producing an empty table.
inline const std::vector<std::pair<std::size_t, Vector>>& parallel_coordinates_table(
    const EnsembleReport& report) {
    if (report.retained_b_table.empty()) {
        throw EmptySelectionError("parallel coordinates: no retained experiment");
    }
    return report.retained_b_table;
}

}  // namespace varpro
