#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gogrow/errors.hpp"
#include "gogrow/integrate.hpp"
#include "gogrow/model.hpp"
#include "gogrow/spectral.hpp"
#include "gogrow/trajectory.hpp"

namespace gogrow {

/// Absolute tolerance for "the trajectory reached x_*".
inline constexpr double kConvergenceTolerance = 1e-6;

/// Outcome of a heteroclinic launch from phi(s) = c e^{lambda_0 s}, the
/// first-order approximation of the unstable-manifold initial segment.
struct HeteroclinicResult {
  double c = 0.0;
  double lambda0 = 0.0;       // leading real eigenvalue at zero
  double fitted_growth = 0.0; // log-linear fit over the window x < x_*/10
  double terminal_gap = 0.0;  // |x(t_end) - x_*|
  bool converged = false;     // terminal_gap < tolerance
  Trajectory trajectory;
  DiagnosticsSeries diagnostics;
};

inline HeteroclinicResult heteroclinic(const ModelParams& params, double c,
                                       const IntegratorConfig& config) {
  config.validate();
  const double c_max = 1.0 / (2.0 * (1.0 + params.rho));
  if (!(c > 0.0 && c <= c_max))
    throw invalid_input_error("heteroclinic: need 0 < c <= 1/(2(1+rho))");

  const double lambda0 = leading_real_root_at_zero(params);
  const HistoryFunction phi = HistoryFunction::from_function(
      [&](double s) { return c * std::exp(lambda0 * s); },
      config.steps_per_delay);
  IntegrationResult run = integrate(params, phi, config);

  const double x_star = equilibria(params).second;
  const auto& x = run.trajectory.values();
  const auto n0 = static_cast<std::size_t>(run.trajectory.steps_per_delay());
  const double h = run.trajectory.step();

  // least-squares slope of ln x over the early window x < x_*/10
  double sw = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = n0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || x[i] >= x_star / 10.0) break;
    const double t = static_cast<double>(i - n0) * h;
    const double y = std::log(x[i]);
    sw += 1; st += t; sy += y; stt += t * t; sty += t * y;
  }
  const double denom = sw * stt - st * st;
  const double growth = sw >= 2 && denom != 0.0
                            ? (sw * sty - st * sy) / denom
                            : std::numeric_limits<double>::quiet_NaN();

  HeteroclinicResult res{c,
                         lambda0,
                         growth,
                         std::abs(x.back() - x_star),
                         false,
                         std::move(run.trajectory),
                         std::move(run.diagnostics)};
  res.converged = res.terminal_gap < kConvergenceTolerance;
  return res;
}

/// Measured oscillation features of a trajectory window: dominant peaks,
/// period and envelope decay, next to the leading linearized pair for
/// comparison.
struct TransientDiagnostics {
  std::vector<double> peak_times;
  std::vector<double> peak_values;
  double dominant_period = 0.0;  // median of consecutive peak gaps
  double envelope_rate = 0.0;    // log-linear fit to (peak - x_*)
  complex_t leading_pair;        // at_star pair, positive-imaginary member
};

namespace detail {

struct Peak {
  double t;
  double value;
};

/// Strict local maxima on the node grid, filtered by adjacent-valley
/// prominence (> 1e-9, suppressing grid-level noise) and then reduced to the
/// dominant humps: amplitude above x_* at least half the window's largest.
/// Without the second filter the median gap measures the spacing of
/// secondary humps of multi-humped waveforms instead of the period.
inline std::vector<Peak> dominant_peaks(const Trajectory& traj, double t_a,
                                        double t_b, double x_star) {
  const auto& x = traj.values();
  const std::size_t i_a = traj.node_index(t_a);
  const std::size_t i_b = traj.node_index(t_b);

  std::vector<std::size_t> maxima;
  for (std::size_t i = std::max<std::size_t>(i_a, 1); i + 1 <= i_b && i + 1 < x.size(); ++i)
    if (x[i] > x[i - 1] && x[i] > x[i + 1]) maxima.push_back(i);

  std::vector<Peak> peaks;
  for (std::size_t k = 0; k < maxima.size(); ++k) {
    const std::size_t i = maxima[k];
    const std::size_t lo = k == 0 ? i_a : maxima[k - 1];
    const std::size_t hi = k + 1 == maxima.size() ? i_b : maxima[k + 1];
    double left_valley = x[i], right_valley = x[i];
    for (std::size_t j = lo; j < i; ++j) left_valley = std::min(left_valley, x[j]);
    for (std::size_t j = i + 1; j <= hi; ++j)
      right_valley = std::min(right_valley, x[j]);
    const double prominence = x[i] - std::max(left_valley, right_valley);
    if (prominence > 1e-9)
      peaks.push_back({traj.node_time(i), x[i]});
  }

  double amp = 0.0;
  for (const Peak& p : peaks) amp = std::max(amp, p.value - x_star);
  std::vector<Peak> dominant;
  for (const Peak& p : peaks)
    if (p.value > x_star && p.value - x_star >= 0.5 * amp) dominant.push_back(p);
  return dominant;
}

}  // namespace detail

/// Pure measurement on [t_a, t_b] (window length >= 5 delay units required).
/// Throws insufficient_oscillation_error with fewer than 3 dominant peaks.
inline TransientDiagnostics transient_diagnostics(const Trajectory& traj,
                                                  double t_a, double t_b,
                                                  const ModelParams& params) {
  if (!(t_b - t_a >= 5.0))
    throw invalid_input_error("transient_diagnostics: window shorter than 5 delays");
  if (t_a < traj.t_start() || t_b > traj.t_end() + 1e-9)
    throw invalid_input_error("transient_diagnostics: window outside trajectory");

  const double x_star = equilibria(params).second;
  const auto peaks = detail::dominant_peaks(traj, t_a, t_b, x_star);
  if (peaks.size() < 3)
    throw insufficient_oscillation_error(
        "transient_diagnostics: fewer than 3 peaks in window");

  TransientDiagnostics d;
  for (const auto& p : peaks) {
    d.peak_times.push_back(p.t);
    d.peak_values.push_back(p.value);
  }

  std::vector<double> gaps;
  for (std::size_t i = 1; i < peaks.size(); ++i)
    gaps.push_back(peaks[i].t - peaks[i - 1].t);
  std::sort(gaps.begin(), gaps.end());
  d.dominant_period = gaps[gaps.size() / 2];

  double sw = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (const auto& p : peaks) {
    const double y = std::log(p.value - x_star);
    sw += 1; st += p.t; sy += y; stt += p.t * p.t; sty += p.t * y;
  }
  d.envelope_rate = (sw * sty - st * sy) / (sw * stt - st * st);
  d.leading_pair = leading_star_pair(params);
  return d;
}

/// One entry of the waveform gallery.
struct GalleryEntry {
  std::string name;
  Trajectory trajectory;
  DiagnosticsSeries diagnostics;
  std::optional<TransientDiagnostics> transient;
};

/// Batch integration of the three standard initial functions
/// 0.005(cos(10t)+1), 0.005(cos(20t)+1), 0.005(cos(10t^4)+1) plus any
/// user-supplied ones, with oscillation diagnostics on the trailing
/// 20-delay window.
inline std::vector<GalleryEntry> shape_gallery(
    const ModelParams& params,
    const std::vector<std::pair<std::string, HistoryFunction>>& extra,
    const IntegratorConfig& config) {
  config.validate();
  std::vector<std::pair<std::string, HistoryFunction>> cases;
  const int n = config.steps_per_delay;
  cases.emplace_back("cos10t", HistoryFunction::cosine(10.0, 1.0, 0.005, n));
  cases.emplace_back("cos20t", HistoryFunction::cosine(20.0, 1.0, 0.005, n));
  cases.emplace_back("cos10t4", HistoryFunction::cosine(10.0, 4.0, 0.005, n));
  for (const auto& e : extra) cases.push_back(e);

  std::vector<GalleryEntry> out;
  for (auto& [name, phi] : cases) {
    if (!in_omega(phi.grid_count() == n ? phi : phi.resample(n), params))
      throw invalid_input_error("shape_gallery: initial function '" + name +
                                "' is not in Omega");
    IntegrationResult run = integrate(params, phi, config);
    GalleryEntry entry{name, std::move(run.trajectory),
                       std::move(run.diagnostics), std::nullopt};
    const double t_end = entry.trajectory.t_end();
    const double t_a = std::max(0.0, t_end - 20.0);
    if (t_end - t_a >= 5.0) {
      try {
        entry.transient =
            transient_diagnostics(entry.trajectory, t_a, t_end, params);
      } catch (const insufficient_oscillation_error&) {
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace gogrow
