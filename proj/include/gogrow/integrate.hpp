#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gogrow/errors.hpp"
#include "gogrow/model.hpp"
#include "gogrow/trajectory.hpp"

namespace gogrow {

/// Admissible overshoot of [0, 1] before an integration started in Omega is
/// declared broken.
inline constexpr double kGrowthTolerance = 1e-6;

struct IntegratorConfig {
  int steps_per_delay = 200;
  double t_end = 60.0;
  bool record_diagnostics = true;

  void validate() const {
    if (steps_per_delay < 16 || steps_per_delay % 2 != 0)
      throw invalid_input_error("IntegratorConfig: N must be even and >= 16");
    if (!(std::isfinite(t_end) && t_end > 0.0))
      throw invalid_input_error("IntegratorConfig: t_end must be > 0");
  }
};

struct IntegrationResult {
  Trajectory trajectory;
  DiagnosticsSeries diagnostics;
};

namespace detail {

/// Fixed-step classic RK4 on the augmented state (x, I) with
/// I(t) = Int_{t-1}^t x(s) ds, I' = x(t) - x(t-1). The delay is exactly N
/// steps, so delayed stage lookups use integer node indices plus the stage
/// fraction; breakpoints at integer times always coincide with grid nodes.
///
/// `seeded` runs the jump start x == 0 on [-1, 0), x(0) = x0: lookups at
/// t = 0 issued from within the first delay interval take the left-hand
/// branch (0), later ones the stored value.
inline IntegrationResult method_of_steps(const ModelParams& params,
                                         const HistoryFunction& history,
                                         const IntegratorConfig& config,
                                         bool seeded, double seed_value,
                                         double initial_integral,
                                         bool started_in_omega) {
  config.validate();
  const int n = config.steps_per_delay;
  const double h = 1.0 / n;
  const auto steps =
      static_cast<std::size_t>(std::ceil(config.t_end * n - 1e-9));
  const double rho = params.rho;

  const auto nn = static_cast<std::size_t>(n);
  std::vector<double> x(nn + steps + 1), d(nn + steps + 1);
  for (std::size_t i = 0; i <= nn; ++i) x[i] = history.samples()[i];
  if (seeded) x[nn] = seed_value;
  for (std::size_t i = 0; i < nn; ++i)
    d[i] = history.eval_derivative(-1.0 + static_cast<double>(i) * h);
  const double hist_slope_zero = history.eval_derivative(0.0);

  DiagnosticsSeries diag;
  if (config.record_diagnostics) {
    diag.times.reserve(steps + 1);
    diag.theta.reserve(steps + 1);
    diag.w.reserve(steps + 1);
    diag.running_integral.reserve(steps + 1);
  }

  double integral = initial_integral;

  // Delayed value at grid position (step + frac) - N, where frac is 0, 1/2
  // or 1 and `step` counts from t = 0.
  auto delayed = [&](std::size_t step, int half_frac,
                     std::size_t current_step) -> double {
    const std::size_t q = step + (half_frac == 2 ? 1 : 0);
    if (half_frac != 1) {  // node lookup
      if (seeded && q == nn) return current_step < nn ? 0.0 : x[nn];
      return x[q];
    }
    // midpoint of cell [q, q+1]
    if (q + 1 <= nn)
      return history.eval(-1.0 + (static_cast<double>(q) + 0.5) * h);
    const double v0 = x[q], v1 = x[q + 1], d0 = d[q];
    // a jump start makes x' jump at t = 1 (global node 2N); the cell ending
    // there is interpolated with the left-hand limit -rho x(1)
    const double d1 =
        (seeded && q + 1 == 2 * nn) ? -rho * x[q + 1] : d[q + 1];
    return 0.5 * (v0 + v1) + 0.125 * h * (d0 - d1);
  };

  auto rhs_pair = [&](double xv, double iv,
                      double xdel) -> std::pair<double, double> {
    return {-rho * xv + rho * xdel * (2.0 - rho * iv - xv), xv - xdel};
  };

  auto record = [&](std::size_t step, double xv, double iv) {
    if (!config.record_diagnostics) return;
    diag.times.push_back(static_cast<double>(step) * h);
    const double th = xv + rho * iv;
    diag.theta.push_back(th);
    diag.w.push_back(1.0 - th);
    diag.running_integral.push_back(iv);
  };

  record(0, x[nn], integral);
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t g = nn + s;
    const double xv = x[g], iv = integral;
    const auto [k1x, k1i] = rhs_pair(xv, iv, delayed(s, 0, s));
    d[g] = k1x;
    const double xdm = delayed(s, 1, s);
    const auto [k2x, k2i] =
        rhs_pair(xv + 0.5 * h * k1x, iv + 0.5 * h * k1i, xdm);
    const auto [k3x, k3i] =
        rhs_pair(xv + 0.5 * h * k2x, iv + 0.5 * h * k2i, xdm);
    const auto [k4x, k4i] =
        rhs_pair(xv + h * k3x, iv + h * k3i, delayed(s, 2, s));
    x[g + 1] = xv + h / 6.0 * (k1x + 2.0 * (k2x + k3x) + k4x);
    integral = iv + h / 6.0 * (k1i + 2.0 * (k2i + k3i) + k4i);
    if (started_in_omega && !(x[g + 1] >= -kGrowthTolerance &&
                              x[g + 1] <= 1.0 + kGrowthTolerance))
      throw invariance_violation_error(
          "integrate: solution left [0,1] band despite feasible start (t = " +
          std::to_string(static_cast<double>(s + 1) * h) + ")");
    record(s + 1, x[g + 1], integral);
  }
  {  // right-limit RHS at the final node, for dense output
    const std::size_t g = nn + steps;
    const auto [kx, ki] = rhs_pair(x[g], integral, delayed(steps, 0, steps));
    (void)ki;
    d[g] = kx;
  }

  Trajectory traj(params, history, std::move(x), std::move(d),
                  hist_slope_zero, started_in_omega);
  return IntegrationResult{std::move(traj), std::move(diag)};
}

}  // namespace detail

/// Integrate x' = -rho x + rho x(t-1)(2 - rho I - x) from the history phi.
/// Out-of-Omega starts are integrated anyway; the trajectory carries the
/// feasibility flag and the in-band check is skipped for them.
inline IntegrationResult integrate(const ModelParams& params,
                                   const HistoryFunction& phi,
                                   const IntegratorConfig& config) {
  config.validate();
  const HistoryFunction resampled = phi.grid_count() == config.steps_per_delay
                                        ? phi
                                        : phi.resample(config.steps_per_delay);
  const bool feasible = in_omega(resampled, params);
  return detail::method_of_steps(params, resampled, config, false, 0.0,
                                 resampled.integral(), feasible);
}

/// Jump start: x == 0 on [-1, 0) and x(0) = x0. This is the initial state of
/// the dimensional mean-field model after non-dimensionalisation.
inline IntegrationResult integrate_seeded(const ModelParams& params, double x0,
                                          const IntegratorConfig& config) {
  config.validate();
  if (!std::isfinite(x0))
    throw invalid_input_error("integrate_seeded: non-finite x0");
  const HistoryFunction zero =
      HistoryFunction::constant(0.0, config.steps_per_delay);
  const bool feasible = x0 >= 0.0 && x0 <= 1.0;
  return detail::method_of_steps(params, zero, config, true, x0, 0.0,
                                 feasible);
}

/// Sup-norm defect of the identity w(t) = w(0) exp(-rho Int_0^t x(s-1) ds).
/// Both sides are computed independently of each other (the left from the
/// integrated running integral, the right by quadrature of the dense output),
/// so this is a consistency check of the integrator.
inline double w_crosscheck(const Trajectory& traj,
                           const DiagnosticsSeries& diag) {
  if (diag.empty())
    throw invalid_input_error("w_crosscheck: diagnostics were not recorded");
  const double rho = traj.params().rho;
  const std::vector<double> cum = traj.cumulative_integral();
  const double w0 = diag.w.front();
  double sup = 0.0;
  for (std::size_t k = 0; k < diag.times.size(); ++k) {
    const double formula = w0 * std::exp(-rho * cum[k]);
    sup = std::max(sup, std::abs(diag.w[k] - formula));
  }
  return sup;
}

/// Dimensional mean-field parameters: switching rate r, cell-cycle delay tau,
/// carrying capacity K (site count) and the motile density at time zero.
/// The prehistory is m == 0 on [-tau, 0) with p(0) = 0.
struct MeanFieldParams {
  double r = 1.0;
  double tau = 1.0;
  double K = 1.0;
  double m0 = 0.0;

  void validate() const {
    if (!(std::isfinite(r) && r > 0.0) || !(std::isfinite(tau) && tau > 0.0) ||
        !(std::isfinite(K) && K > 0.0))
      throw invalid_input_error("MeanFieldParams: need r, tau, K > 0");
    if (!(std::isfinite(m0) && m0 >= 0.0 && m0 <= K))
      throw invalid_input_error("MeanFieldParams: need 0 <= m0 <= K");
  }
};

/// Solution of the dimensional system on the grid t_k = k tau / N, k >= 0.
/// p_check is the quadrature route Int_{t-tau}^t r m(s) ds, recorded for
/// cross-checking against the integrated p.
struct MeanFieldSolution {
  MeanFieldParams params;
  int steps_per_delay = 0;
  std::vector<double> times;
  std::vector<double> m;
  std::vector<double> p;
  std::vector<double> p_check;
};

inline MeanFieldSolution mean_field_integrate(const MeanFieldParams& mf,
                                              const IntegratorConfig& config) {
  mf.validate();
  config.validate();
  const int n = config.steps_per_delay;
  const auto nn = static_cast<std::size_t>(n);
  const double h = mf.tau / n;
  const auto steps =
      static_cast<std::size_t>(std::ceil(config.t_end / h - 1e-9));
  const double r = mf.r, K = mf.K;

  std::vector<double> m(steps + 1), dm(steps + 1), p(steps + 1);
  m[0] = mf.m0;
  p[0] = 0.0;

  // Delayed motile density at grid position (step + frac) - N relative to
  // t = 0; zero before the jump at t = 0.
  auto delayed = [&](std::size_t step, int half_frac,
                     std::size_t current_step) -> double {
    const std::size_t pos = step + (half_frac == 2 ? 1 : 0);
    if (pos < nn) return 0.0;
    if (half_frac != 1) {
      if (pos == nn) return current_step < nn ? 0.0 : m[0];
      return m[pos - nn];
    }
    const std::size_t q = pos - nn;
    // m' jumps at t = tau; interpolation in the cell ending there needs the
    // left-hand limit -r m(tau), not the stored right-hand derivative
    const double d1 = (q + 1 == nn) ? -r * m[nn] : dm[q + 1];
    return 0.5 * (m[q] + m[q + 1]) + 0.125 * h * (dm[q] - d1);
  };

  const double band = kGrowthTolerance * K;
  auto rhs_pair = [&](double mv, double pv,
                      double mdel) -> std::pair<double, double> {
    const double dmv =
        -r * mv + r * mdel + r * mdel * ((K - pv - mv) / K);
    const double dpv = r * mv - r * mdel;
    return {dmv, dpv};
  };

  for (std::size_t s = 0; s < steps; ++s) {
    const double mv = m[s], pv = p[s];
    const auto [k1m, k1p] = rhs_pair(mv, pv, delayed(s, 0, s));
    dm[s] = k1m;
    const double mdm = delayed(s, 1, s);
    const auto [k2m, k2p] = rhs_pair(mv + 0.5 * h * k1m, pv + 0.5 * h * k1p, mdm);
    const auto [k3m, k3p] = rhs_pair(mv + 0.5 * h * k2m, pv + 0.5 * h * k2p, mdm);
    const auto [k4m, k4p] =
        rhs_pair(mv + h * k3m, pv + h * k3p, delayed(s, 2, s));
    m[s + 1] = mv + h / 6.0 * (k1m + 2.0 * (k2m + k3m) + k4m);
    p[s + 1] = pv + h / 6.0 * (k1p + 2.0 * (k2p + k3p) + k4p);
    if (!(m[s + 1] >= -band && m[s + 1] <= K + band &&
          m[s + 1] + p[s + 1] <= K + band))
      throw invariance_violation_error(
          "mean_field_integrate: densities left [0, K] band");
  }
  {
    const auto [km, kp] = rhs_pair(m[steps], p[steps], delayed(steps, 0, steps));
    (void)kp;
    dm[steps] = km;
  }

  // Quadrature route for p: cumulative Hermite-cell integrals of m. m' jumps
  // at t = tau (the delayed term switches on there); the cell ending at that
  // node needs the left-hand limit of m', not the stored right-hand one.
  const double dm_left_tau = steps >= nn ? -r * m[nn] : 0.0;
  std::vector<double> cum(steps + 1);
  cum[0] = 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double d1 = (s + 1 == nn) ? dm_left_tau : dm[s + 1];
    cum[s + 1] = cum[s] + 0.5 * h * (m[s] + m[s + 1]) +
                 h * h / 12.0 * (dm[s] - d1);
  }

  MeanFieldSolution sol;
  sol.params = mf;
  sol.steps_per_delay = n;
  sol.times.resize(steps + 1);
  sol.p_check.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    sol.times[k] = static_cast<double>(k) * h;
    sol.p_check[k] = k >= nn ? r * (cum[k] - cum[k - nn]) : r * cum[k];
  }
  sol.m = std::move(m);
  sol.p = std::move(p);
  return sol;
}

/// Empirical persistence floor: the smallest late-window value of x across a
/// family of feasible initial functions with phi(0) > 0.
inline double persistence_floor(const ModelParams& params,
                                const std::vector<HistoryFunction>& phi_set,
                                const IntegratorConfig& config) {
  if (phi_set.empty())
    throw invalid_input_error("persistence_floor: empty phi set");
  double floor_value = std::numeric_limits<double>::infinity();
  for (const auto& phi : phi_set) {
    if (!(phi.value_at_zero() > 0.0) || !in_omega(phi, params))
      throw invalid_input_error(
          "persistence_floor: every phi must lie in Omega with phi(0) > 0");
    IntegratorConfig c = config;
    c.record_diagnostics = false;
    const IntegrationResult res = integrate(params, phi, c);
    const auto& x = res.trajectory.values();
    const auto nn =
        static_cast<std::size_t>(res.trajectory.steps_per_delay());
    const std::size_t total_steps = x.size() - nn - 1;
    for (std::size_t s = total_steps / 2; s <= total_steps; ++s)
      floor_value = std::min(floor_value, x[nn + s]);
  }
  return floor_value;
}

}  // namespace gogrow
