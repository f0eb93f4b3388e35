#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "gogrow/errors.hpp"
#include "gogrow/model.hpp"

namespace gogrow {

/// Diagnostic series recorded alongside an integration on the grid t >= 0:
/// total density theta(t), w(t) = 1 - theta(t) and the running integral
/// I(t) = Int_{t-1}^t x(s) ds.
struct DiagnosticsSeries {
  std::vector<double> times;
  std::vector<double> theta;
  std::vector<double> w;
  std::vector<double> running_integral;

  bool empty() const { return times.empty(); }
};

/// Dense numerical solution on [-1, t_end] with fixed step h = 1/N. Node i
/// sits at t_i = -1 + i*h; the delay is exactly N steps. Evaluation is C^1
/// cubic Hermite on (values, derivs) for t >= 0 and delegates to the stored
/// history segment for t <= 0 (the derivative may jump at t = 0). Immutable
/// after construction.
class Trajectory {
 public:
  Trajectory(ModelParams params, HistoryFunction history,
             std::vector<double> values, std::vector<double> derivs,
             double hist_slope_zero, bool from_omega)
      : params_(params),
        history_(std::move(history)),
        values_(std::move(values)),
        derivs_(std::move(derivs)),
        hist_slope_zero_(hist_slope_zero),
        from_omega_(from_omega),
        steps_per_delay_(history_.grid_count()) {
    if (values_.size() != derivs_.size())
      throw invalid_input_error("Trajectory: values/derivs length mismatch");
    if (values_.size() < static_cast<std::size_t>(steps_per_delay_) + 1)
      throw invalid_input_error("Trajectory: must cover at least [-1, 0]");
  }

  const ModelParams& params() const { return params_; }
  const HistoryFunction& history() const { return history_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& derivs() const { return derivs_; }
  bool from_omega() const { return from_omega_; }

  int steps_per_delay() const { return steps_per_delay_; }
  double step() const { return 1.0 / steps_per_delay_; }
  double t_start() const { return -1.0; }
  double t_end() const { return node_time(node_count() - 1); }
  std::size_t node_count() const { return values_.size(); }

  double node_time(std::size_t i) const {
    return -1.0 + static_cast<double>(i) / steps_per_delay_;
  }

  /// Grid index of time t; throws unless t is (numerically) a node.
  std::size_t node_index(double t) const {
    const double p = (t + 1.0) * steps_per_delay_;
    const auto i = static_cast<long>(std::lround(p));
    if (i < 0 || i >= static_cast<long>(node_count()) ||
        std::abs(p - static_cast<double>(i)) > 1e-6)
      throw invalid_input_error("Trajectory::node_index: t is not a grid node");
    return static_cast<std::size_t>(i);
  }

  /// Dense evaluation on [-1, t_end]. Node times hit stored values exactly.
  double eval(double t) const {
    if (t <= 0.0) {
      if (t < -1.0 - 1e-9)
        throw invalid_input_error("Trajectory::eval: t before -1");
      return history_.eval(std::max(t, -1.0));
    }
    const int n = steps_per_delay_;
    const double p = (t + 1.0) * n;
    const auto last = static_cast<double>(node_count() - 1);
    if (p > last + 1e-6)
      throw invalid_input_error("Trajectory::eval: t after t_end");
    const auto nearest = static_cast<long>(std::lround(p));
    if (std::abs(p - static_cast<double>(nearest)) < 1e-9)
      return values_[static_cast<std::size_t>(nearest)];
    auto cell = static_cast<std::size_t>(std::floor(p));
    if (cell + 2 > node_count()) cell = node_count() - 2;
    const double u = std::clamp(p - static_cast<double>(cell), 0.0, 1.0);
    return hermite(values_[cell], derivs_[cell], values_[cell + 1],
                   derivs_[cell + 1], u, 1.0 / n);
  }

  /// Integral of the dense solution over one grid cell [t_i, t_{i+1}]
  /// (exact for the cubic Hermite representation).
  double cell_integral(std::size_t i) const {
    const double h = step();
    const auto n = static_cast<std::size_t>(steps_per_delay_);
    double d0 = derivs_[i];
    double d1 = (i + 1 == n) ? hist_slope_zero_ : derivs_[i + 1];
    return 0.5 * h * (values_[i] + values_[i + 1]) +
           h * h / 12.0 * (d0 - d1);
  }

  /// Cumulative integral C[k] = Int_{-1}^{t_k} x(s) ds at every node.
  std::vector<double> cumulative_integral() const {
    std::vector<double> c(node_count());
    c[0] = 0.0;
    for (std::size_t i = 0; i + 1 < node_count(); ++i)
      c[i + 1] = c[i] + cell_integral(i);
    return c;
  }

 private:
  static double hermite(double v0, double d0, double v1, double d1, double u,
                        double h) {
    const double a = 1.0 - u;
    return a * a * (1.0 + 2.0 * u) * v0 + u * u * (3.0 - 2.0 * u) * v1 +
           h * u * a * (a * d0 - u * d1);
  }

  ModelParams params_;
  HistoryFunction history_;
  std::vector<double> values_;
  std::vector<double> derivs_;
  // Left-sided slope of the history interpolant at t = 0. derivs_ at the
  // t = 0 node holds the right-hand limit of the RHS, so the quadrature of
  // the last history cell needs this separately.
  double hist_slope_zero_;
  bool from_omega_;
  int steps_per_delay_;
};

}  // namespace gogrow
