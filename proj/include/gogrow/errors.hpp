#pragma once

#include <stdexcept>
#include <string>

namespace gogrow {

/// Base class for all library errors.
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Rejected input: non-finite samples, parameters out of range, malformed config.
struct invalid_input_error : error {
  using error::error;
};

/// A solution started inside the feasible set left the admissible band.
/// Signals an integrator bug or a too-coarse step count.
struct invariance_violation_error : error {
  using error::error;
};

/// Root count after refinement disagrees with the winding number, or a
/// rectangle boundary could not be moved off a root.
struct subdivision_error : error {
  using error::error;
};

/// Parameter sits on a stability threshold where root counting is discontinuous.
struct degenerate_parameter_error : error {
  using error::error;
};

/// Evaluation at a pole of the parametrization (sin nu = 0).
struct singularity_error : error {
  using error::error;
};

/// Too few oscillation peaks in the requested window to measure period/envelope.
struct insufficient_oscillation_error : error {
  using error::error;
};

}  // namespace gogrow
