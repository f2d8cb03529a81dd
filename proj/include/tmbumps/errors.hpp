#ifndef TMBUMPS_ERRORS_HPP
#define TMBUMPS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tmbumps {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Adaptive quadrature could not reach the requested tolerance.
struct QuadratureError : Error {
    using Error::Error;
};

/// The adaptive ODE stepper hit the minimal step size.
struct StepFailure : Error {
    using Error::Error;
};

/// Green function evaluation at (numerically) coincident points.
struct CoincidentPoints : Error {
    using Error::Error;
};

/// Collocation residual above threshold.
struct BackendTolerance : Error {
    using Error::Error;
};

/// Two configuration points closer than the gap floor.
struct DegenerateGap : Error {
    using Error::Error;
};

/// Newton iterate left the domain and backtracking was exhausted.
struct BoundaryEscape : Error {
    using Error::Error;
};

/// Newton did not reach the residual tolerance; carries the best norm seen.
struct NonConvergence : Error {
    double best_residual;
    explicit NonConvergence(const std::string& msg, double best)
        : Error(msg), best_residual(best) {}
};

/// Mismatch between a branch point's domain and a configuration's domain.
struct ConfigMismatch : Error {
    using Error::Error;
};

/// Malformed input file; carries the 1-based line number.
struct ParseError : Error {
    int line;
    ParseError(const std::string& msg, int line_) : Error(msg), line(line_) {}
};

}  // namespace tmbumps

#endif
