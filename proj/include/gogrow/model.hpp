#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "gogrow/errors.hpp"

namespace gogrow {

/// The single dimensionless parameter rho = r * tau of the rescaled equation
///
///   x'(t) = -rho x(t) + rho x(t-1) (2 - rho Int_{t-1}^t x(s) ds - x(t)).
struct ModelParams {
  double rho;

  explicit ModelParams(double rho_) : rho(rho_) {
    if (!(std::isfinite(rho) && rho > 0.0))
      throw invalid_input_error("ModelParams: rho must be finite and > 0");
  }
};

/// Tolerance on the total-density test theta <= 1 when classifying membership
/// in the feasible set; boundary states (theta == 1) must be accepted.
inline constexpr double kOmegaTolerance = 1e-12;

/// An initial segment phi on [-1, 0], stored as N+1 samples on the uniform
/// grid s_i = -1 + i/N. Dense evaluation is piecewise cubic (4-point Lagrange
/// stencils), which reproduces the samples exactly at grid points. Immutable
/// after construction.
class HistoryFunction {
 public:
  explicit HistoryFunction(std::vector<double> samples)
      : samples_(std::move(samples)) {
    const std::size_t n = samples_.size();
    if (n < 17) throw invalid_input_error("HistoryFunction: need N >= 16");
    grid_count_ = static_cast<int>(n - 1);
    if (grid_count_ % 2 != 0)
      throw invalid_input_error("HistoryFunction: N must be even");
    for (double v : samples_)
      if (!std::isfinite(v))
        throw invalid_input_error("HistoryFunction: non-finite sample");
  }

  static HistoryFunction constant(double value, int grid_count = 200) {
    return HistoryFunction(
        std::vector<double>(static_cast<std::size_t>(grid_count) + 1, value));
  }

  /// Sample an arbitrary callable on the uniform grid.
  static HistoryFunction from_function(const std::function<double(double)>& f,
                                       int grid_count = 200) {
    if (grid_count < 16)
      throw invalid_input_error("HistoryFunction: need N >= 16");
    std::vector<double> s(static_cast<std::size_t>(grid_count) + 1);
    for (int i = 0; i <= grid_count; ++i)
      s[static_cast<std::size_t>(i)] =
          f(-1.0 + static_cast<double>(i) / grid_count);
    return HistoryFunction(std::move(s));
  }

  /// phi(s) = scale * (cos(a * s^power) + 1), the family used throughout.
  static HistoryFunction cosine(double a, double power, double scale,
                                int grid_count = 200) {
    return from_function(
        [=](double s) { return scale * (std::cos(a * std::pow(s, power)) + 1.0); },
        grid_count);
  }

  int grid_count() const { return grid_count_; }
  const std::vector<double>& samples() const { return samples_; }
  double step() const { return 1.0 / grid_count_; }

  double value_at_zero() const { return samples_.back(); }
  double value_at_minus_one() const { return samples_.front(); }

  double sup_norm() const {
    double m = 0.0;
    for (double v : samples_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Dense evaluation on [-1, 0]. Exact at grid points.
  double eval(double s) const {
    if (s < -1.0 - 1e-9 || s > 1e-9)
      throw invalid_input_error("HistoryFunction::eval: s outside [-1, 0]");
    const int n = grid_count_;
    double p = (s + 1.0) * n;
    p = std::clamp(p, 0.0, static_cast<double>(n));
    const int nearest = static_cast<int>(std::lround(p));
    if (std::abs(p - nearest) < 1e-9)
      return samples_[static_cast<std::size_t>(nearest)];
    int cell = static_cast<int>(std::floor(p));
    cell = std::clamp(cell, 0, n - 1);
    const int j0 = std::clamp(cell - 1, 0, n - 3);
    const double u = p - j0;
    // Lagrange cubic through samples j0..j0+3 at local coordinates 0..3.
    const double y0 = samples_[static_cast<std::size_t>(j0)];
    const double y1 = samples_[static_cast<std::size_t>(j0) + 1];
    const double y2 = samples_[static_cast<std::size_t>(j0) + 2];
    const double y3 = samples_[static_cast<std::size_t>(j0) + 3];
    const double l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
    const double l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
    const double l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
    const double l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
    return y0 * l0 + y1 * l1 + y2 * l2 + y3 * l3;
  }

  /// Derivative of the local interpolant; used for quadrature of the history
  /// segment, never for the dynamics.
  double eval_derivative(double s) const {
    const int n = grid_count_;
    double p = std::clamp((s + 1.0) * n, 0.0, static_cast<double>(n));
    int cell = std::clamp(static_cast<int>(std::floor(p - 1e-12)), 0, n - 1);
    const int j0 = std::clamp(cell - 1, 0, n - 3);
    const double u = p - j0;
    const double y0 = samples_[static_cast<std::size_t>(j0)];
    const double y1 = samples_[static_cast<std::size_t>(j0) + 1];
    const double y2 = samples_[static_cast<std::size_t>(j0) + 2];
    const double y3 = samples_[static_cast<std::size_t>(j0) + 3];
    const double d0 = -((u - 1.0) * (u - 2.0) + (u - 1.0) * (u - 3.0) +
                        (u - 2.0) * (u - 3.0)) / 6.0;
    const double d1 = (u * (u - 2.0) + u * (u - 3.0) + (u - 2.0) * (u - 3.0)) / 2.0;
    const double d2 = -(u * (u - 1.0) + u * (u - 3.0) + (u - 1.0) * (u - 3.0)) / 2.0;
    const double d3 = (u * (u - 1.0) + u * (u - 2.0) + (u - 1.0) * (u - 2.0)) / 6.0;
    return (y0 * d0 + y1 * d1 + y2 * d2 + y3 * d3) * n;
  }

  /// Composite Simpson integral over [-1, 0]. Weights are accumulated as
  /// exact small integers and scaled once, so constant histories integrate
  /// to value * 1 up to a couple of ulps.
  double integral() const {
    const int n = grid_count_;
    double acc = samples_.front() + samples_.back();
    for (int i = 1; i < n; ++i)
      acc += (i % 2 == 1 ? 4.0 : 2.0) * samples_[static_cast<std::size_t>(i)];
    return acc / (3.0 * n);
  }

  /// a*phi + b*psi on a shared grid.
  static HistoryFunction combine(double a, const HistoryFunction& phi, double b,
                                 const HistoryFunction& psi) {
    if (phi.grid_count_ != psi.grid_count_)
      throw invalid_input_error("HistoryFunction::combine: grid mismatch");
    std::vector<double> s(phi.samples_.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      s[i] = a * phi.samples_[i] + b * psi.samples_[i];
    return HistoryFunction(std::move(s));
  }

  /// Re-sample the interpolant on a new grid.
  HistoryFunction resample(int new_grid_count) const {
    if (new_grid_count == grid_count_) return *this;
    std::vector<double> s(static_cast<std::size_t>(new_grid_count) + 1);
    for (int i = 0; i <= new_grid_count; ++i)
      s[static_cast<std::size_t>(i)] =
          eval(-1.0 + static_cast<double>(i) / new_grid_count);
    return HistoryFunction(std::move(s));
  }

 private:
  std::vector<double> samples_;
  int grid_count_ = 0;
};

/// The right-hand-side functional
///   f(phi) = -rho phi(0) + rho phi(-1) (2 - rho Int phi - phi(0)).
inline double rhs(const HistoryFunction& phi, const ModelParams& p) {
  const double rho = p.rho;
  return -rho * phi.value_at_zero() +
         rho * phi.value_at_minus_one() *
             (2.0 - rho * phi.integral() - phi.value_at_zero());
}

/// Total cell density theta(phi) = phi(0) + rho Int_{-1}^0 phi.
inline double theta(const HistoryFunction& phi, const ModelParams& p) {
  return phi.value_at_zero() + p.rho * phi.integral();
}

/// Membership in the feasible set Omega: phi >= 0 pointwise (every stored
/// sample, no tolerance) and theta(phi) <= 1 up to quadrature tolerance.
inline bool in_omega(const HistoryFunction& phi, const ModelParams& p) {
  for (double v : phi.samples())
    if (v < 0.0) return false;
  return theta(phi, p) <= 1.0 + kOmegaTolerance;
}

/// The two steady states {0, 1/(rho+1)}.
inline std::pair<double, double> equilibria(const ModelParams& p) {
  return {0.0, 1.0 / (p.rho + 1.0)};
}

/// Lipschitz constant L = 3 rho + M (2 rho^2 + 2 rho) valid on the ball
/// sup|phi| < M.
inline double lipschitz_bound(double M, const ModelParams& p) {
  if (!(std::isfinite(M) && M > 0.0))
    throw invalid_input_error("lipschitz_bound: M must be > 0");
  const double rho = p.rho;
  return 3.0 * rho + M * (2.0 * rho * rho + 2.0 * rho);
}

}  // namespace gogrow
