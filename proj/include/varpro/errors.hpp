#pragma once

// Error taxonomy. Every failure the library can raise carries a stable
// machine-readable code so callers (the ensemble runner, the CLI exit-code
// mapping) can classify outcomes without parsing messages.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace varpro {

enum class ErrorCode {
    invalid_value,              // construction invariant violated (non-finite entry, dy <= 0, ...)
    shape_mismatch,             // non-conformable matrix/vector shapes
    singular_matrix,            // solve_spd: singular or numerically indistinguishable from singular
    length_mismatch,            // prior/parameter length disagreement
    evaluation_error,           // model or objective evaluated to a non-finite value
    singular_normal_equations,  // A(b)^T A(b) singular at this b (degenerate basis)
    unstable_solution,          // one_norm(H) < ap: objective locally flat
    singular_hessian,           // Newton linear solve failed
    no_convergence,             // iteration budget exhausted
    stalled_descent,            // step-halving guard exhausted without decrease
    parse_error,                // malformed model grammar text
    arity_error,                // term references neither x nor b and is not a finite constant
    zero_uncertainty,           // noiseless generation without an explicit dy
    empty_selection,            // no retained experiment to export
    config_error,               // inconsistent run configuration
    invalid_problem,            // fit problem violates its invariants (e.g. n_b == 0)
    io_error                    // file missing/unreadable or malformed CSV
};

inline std::string_view to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::invalid_value: return "invalid_value";
        case ErrorCode::shape_mismatch: return "shape_mismatch";
        case ErrorCode::singular_matrix: return "singular_matrix";
        case ErrorCode::length_mismatch: return "length_mismatch";
        case ErrorCode::evaluation_error: return "evaluation_error";
        case ErrorCode::singular_normal_equations: return "singular_normal_equations";
        case ErrorCode::unstable_solution: return "unstable_solution";
        case ErrorCode::singular_hessian: return "singular_hessian";
        case ErrorCode::no_convergence: return "no_convergence";
        case ErrorCode::stalled_descent: return "stalled_descent";
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::arity_error: return "arity_error";
        case ErrorCode::zero_uncertainty: return "zero_uncertainty";
        case ErrorCode::empty_selection: return "empty_selection";
        case ErrorCode::config_error: return "config_error";
        case ErrorCode::invalid_problem: return "invalid_problem";
        case ErrorCode::io_error: return "io_error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

class ValueError : public Error {
  public:
    explicit ValueError(const std::string& what) : Error(ErrorCode::invalid_value, what) {}
};

class ShapeError : public Error {
  public:
    explicit ShapeError(const std::string& what) : Error(ErrorCode::shape_mismatch, what) {}
};

class SingularMatrixError : public Error {
  public:
    explicit SingularMatrixError(const std::string& what) : Error(ErrorCode::singular_matrix, what) {}
};

class LengthError : public Error {
  public:
    explicit LengthError(const std::string& what) : Error(ErrorCode::length_mismatch, what) {}
};

// Non-finite model/objective value. Carries the dataset row and basis column
// when raised from the design matrix (both npos otherwise).
class EvaluationError : public Error {
  public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    explicit EvaluationError(const std::string& what, std::size_t row = npos,
                             std::size_t col = npos)
        : Error(ErrorCode::evaluation_error, what), row_(row), col_(col) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

  private:
    std::size_t row_, col_;
};

// Degenerate normal equations; carries the offending b.
class SingularNormalEquationsError : public Error {
  public:
    SingularNormalEquationsError(const std::string& what, std::vector<double> b)
        : Error(ErrorCode::singular_normal_equations, what), b_(std::move(b)) {}

    const std::vector<double>& at_b() const noexcept { return b_; }

  private:
    std::vector<double> b_;
};

// Optimizer failure. code() is one of unstable_solution, singular_hessian,
// no_convergence, stalled_descent. Carries the last accepted iterate, the
// number of completed iterations and the last accepted objective value so
// batch drivers can classify and report without re-running.
class OptimizeError : public Error {
  public:
    OptimizeError(ErrorCode code, const std::string& what, std::vector<double> iterate = {},
                  std::size_t iterations = 0, double last_objective = 0.0)
        : Error(code, what),
          iterate_(std::move(iterate)),
          iterations_(iterations),
          last_objective_(last_objective) {}

    const std::vector<double>& iterate() const noexcept { return iterate_; }
    std::size_t iterations() const noexcept { return iterations_; }
    double last_objective() const noexcept { return last_objective_; }

  private:
    std::vector<double> iterate_;
    std::size_t iterations_;
    double last_objective_;
};

// Malformed model text; position is a 0-based byte offset into the source.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t position, std::vector<std::string> expected)
        : Error(ErrorCode::parse_error, what),
          position_(position),
          expected_(std::move(expected)) {}

    std::size_t position() const noexcept { return position_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

  private:
    std::size_t position_;
    std::vector<std::string> expected_;
};

class ArityError : public Error {
  public:
    explicit ArityError(const std::string& what) : Error(ErrorCode::arity_error, what) {}
};

class ZeroUncertaintyError : public Error {
  public:
    explicit ZeroUncertaintyError(const std::string& what) : Error(ErrorCode::zero_uncertainty, what) {}
};

class EmptySelectionError : public Error {
  public:
    explicit EmptySelectionError(const std::string& what) : Error(ErrorCode::empty_selection, what) {}
};

class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& what) : Error(ErrorCode::config_error, what) {}
};

class InvalidProblemError : public Error {
  public:
    explicit InvalidProblemError(const std::string& what) : Error(ErrorCode::invalid_problem, what) {}
};

class IoError : public Error {
  public:
    explicit IoError(const std::string& what) : Error(ErrorCode::io_error, what) {}
};

}  // namespace varpro
