#pragma once

#include <stdexcept>
#include <string>

namespace netctrl {

// Invalid user-supplied parameters (probabilities, intervals, dimensions, config).
struct ParameterError : std::runtime_error {
    explicit ParameterError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files (edge lists, JSON configs).
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// The requested steering task is infeasible: the (target) Gramian is singular,
// either structurally or because the horizon is too short.
struct NotControllableError : std::runtime_error {
    explicit NotControllableError(const std::string& msg) : std::runtime_error(msg) {}
};

// A matrix that must be invertible for the requested operation is singular.
struct SingularMatrixError : std::runtime_error {
    explicit SingularMatrixError(const std::string& msg) : std::runtime_error(msg) {}
};

// Closed-form expressions divide by eigenvalue gaps; repeated eigenvalues
// make them meaningless. Callers should fall back to exact trace computation.
struct DegenerateSpectrumError : std::runtime_error {
    explicit DegenerateSpectrumError(const std::string& msg) : std::runtime_error(msg) {}
};

// Rank-zero or otherwise degenerate controllable decomposition.
struct DegenerateDecompositionError : std::runtime_error {
    explicit DegenerateDecompositionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Overflow / loss of validity in a numeric pipeline (e.g. Gramian entries
// exceeding double range at large horizons).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace netctrl
