#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gogrow/abm.hpp"
#include "gogrow/analysis.hpp"
#include "gogrow/integrate.hpp"
#include "gogrow/model.hpp"
#include "gogrow/spectral.hpp"

namespace gogrow::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

class Checker {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (!fail_.empty()) fail_ += "; ";
      fail_ += what;
    }
  }
  bool pass() const { return pass_; }
  const std::string& message() const { return fail_; }

 private:
  bool pass_ = true;
  std::string fail_;
};

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Same random feasible histories as the unit suites: squared trigonometric
/// polynomial scaled to a target total density.
inline HistoryFunction random_omega_history(std::mt19937_64& rng, double rho,
                                            int n, double theta_target) {
  const double pi = 3.14159265358979323846;
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (;;) {
    const double b0 = 0.5 + 0.5 * std::abs(U(rng));
    double a[3], b[3];
    for (int k = 0; k < 3; ++k) {
      a[k] = 0.4 * U(rng);
      b[k] = 0.4 * U(rng);
    }
    auto raw = HistoryFunction::from_function(
        [&](double s) {
          double v = b0;
          for (int k = 0; k < 3; ++k)
            v += a[k] * std::cos((k + 1) * pi * s) +
                 b[k] * std::sin((k + 1) * pi * s);
          return v * v;
        },
        n);
    const double th = theta(raw, ModelParams(rho));
    if (!(th > 1e-12)) continue;
    std::vector<double> samples = raw.samples();
    for (double& v : samples) v *= theta_target / th;
    HistoryFunction phi(std::move(samples));
    if (phi.value_at_zero() > 1e-4 * phi.sup_norm()) return phi;
  }
}

// --- criteria -------------------------------------------------------------

inline void crit_equilibria(Checker& c) {
  for (double rho : {0.5, 1.0, 3.0, 10.0, 20.0, 100.0}) {
    const ModelParams p(rho);
    const auto [zero, star] = equilibria(p);
    c.require(std::abs(rhs(HistoryFunction::constant(star, 200), p)) < 1e-12,
              "rhs(x*) not < 1e-12 at rho=" + fmt(rho));
    c.require(std::abs(rhs(HistoryFunction::constant(zero, 200), p)) < 1e-12,
              "rhs(0) not < 1e-12 at rho=" + fmt(rho));
    IntegratorConfig cfg;
    cfg.t_end = 50.0;
    cfg.record_diagnostics = false;
    const auto res = integrate(p, HistoryFunction::constant(star, 200), cfg);
    double worst = 0.0;
    for (double v : res.trajectory.values())
      worst = std::max(worst, std::abs(v - star));
    c.require(worst <= 1e-12,
              "x* drifts " + fmt(worst) + " at rho=" + fmt(rho));
  }
}

inline void crit_factorization(Checker& c) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (double rho : {1.0, 10.0, 100.0}) {
    const ModelParams p(rho);
    double worst = 0.0;
    for (int it = 0; it < 10000; ++it) {
      const complex_t lam(U(rng), U(rng));
      if (lam == complex_t(0.0, 0.0)) continue;
      const complex_t factored = (lam + rho / (rho + 1.0)) *
                                 (lam + rho - rho * std::exp(-lam));
      const double err = std::abs(char_star(lam, p) - factored);
      const double bound = 1e-12 * (1.0 + std::norm(lam));
      worst = std::max(worst, err / bound);
    }
    c.require(worst <= 1.0, "factorization defect ratio " + fmt(worst) +
                                " at rho=" + fmt(rho));
  }
}

inline void crit_reported_eigenvalues(Checker& c) {
  const ModelParams p(20.0);
  const double lam0 = leading_real_root_at_zero(p);
  c.require(lam0 >= 0.64 && lam0 <= 0.68,
            "lambda0(20) = " + fmt(lam0) + " outside [0.64, 0.68]");
  const auto roots = find_roots(EquilibriumTag::at_star, p,
                                Rect{-1.0, 1.0, 0.0, 10.0}, 8);
  c.require(!roots.empty(), "no at_star roots found in [-1,1]x[0,10]i");
  if (!roots.empty()) {
    const complex_t lead = roots.front().lambda.imag() >= 0.0
                               ? roots.front().lambda
                               : std::conj(roots.front().lambda);
    c.require(std::abs(lead.real() - (-0.04)) <= 0.02,
              "Re(pair) = " + fmt(lead.real()) + " not within 0.02 of -0.04");
    c.require(std::abs(lead.imag() - 6.0) <= 0.5,
              "Im(pair) = " + fmt(lead.imag()) + " not within 0.5 of 6");
  }
}

inline void crit_thresholds(Checker& c) {
  c.require(std::abs(rho_crit(1) - 3.0230) <= 1e-4,
            "rho_1 = " + fmt(rho_crit(1)));
  c.require(std::abs(rho_crit(2) - 6.6505) <= 1e-4,
            "rho_2 = " + fmt(rho_crit(2)));
  const int below1 = unstable_count_by_winding(ModelParams(rho_crit(1) - 0.05));
  const int above1 = unstable_count_by_winding(ModelParams(rho_crit(1) + 0.05));
  const int below2 = unstable_count_by_winding(ModelParams(rho_crit(2) - 0.05));
  const int above2 = unstable_count_by_winding(ModelParams(rho_crit(2) + 0.05));
  c.require(below1 == 1 && above1 == 3,
            "count across rho_1: " + fmt(below1) + " -> " + fmt(above1));
  c.require(below2 == 3 && above2 == 5,
            "count across rho_2: " + fmt(below2) + " -> " + fmt(above2));
}

inline void crit_spectral_limit(Checker& c) {
  const double pi = 3.14159265358979323846;
  const auto scan = spectral_limit_scan({1.0, 10.0, 100.0},
                                        Rect{-6.0, 1.5, 0.5, 2.0 * pi + 0.3});
  std::vector<double> d;
  for (const auto& row : scan.rows) {
    const auto it = row.pair_distance.find(1);
    c.require(it != row.pair_distance.end(),
              "leading pair missing at rho=" + fmt(row.rho));
    if (it != row.pair_distance.end()) d.push_back(it->second);
  }
  for (std::size_t i = 1; i < d.size(); ++i)
    c.require(d[i] < d[i - 1], "distance to 2 pi i not strictly decreasing (" +
                                   fmt(d[i - 1]) + " -> " + fmt(d[i]) + ")");
}

inline void crit_invariance(Checker& c) {
  std::mt19937_64 rng(7);
  IntegratorConfig cfg;
  cfg.t_end = 80.0;
  for (double rho : {1.0, 10.0, 100.0}) {
    const ModelParams p(rho);
    double worst_low = 0.0, worst_high = 0.0, worst_step = 0.0,
           worst_gap = 0.0;
    for (int it = 0; it < 100; ++it) {
      const auto phi =
          random_omega_history(rng, rho, 200, 0.15 + 0.8 * it / 100.0);
      const auto res = integrate(p, phi, cfg);
      const auto& xs = res.trajectory.values();
      const auto n0 =
          static_cast<std::size_t>(res.trajectory.steps_per_delay());
      for (std::size_t i = n0; i < xs.size(); ++i) {
        worst_low = std::min(worst_low, xs[i]);
        worst_high = std::max(worst_high, xs[i]);
      }
      const auto& th = res.diagnostics.theta;
      for (std::size_t k = 1; k < th.size(); ++k)
        worst_step = std::max(worst_step, th[k - 1] - th[k]);
      worst_gap = std::max(worst_gap, std::abs(th.back() - 1.0));
    }
    c.require(worst_low >= -1e-9 && worst_high <= 1.0 + 1e-9,
              "x left [-1e-9, 1+1e-9] at rho=" + fmt(rho));
    c.require(worst_step <= 1e-10,
              "theta decreased by " + fmt(worst_step) + " at rho=" + fmt(rho));
    c.require(worst_gap < 1e-6, "theta(80) gap " + fmt(worst_gap) +
                                     " at rho=" + fmt(rho));
  }
}

inline void crit_w_formula(Checker& c) {
  const ModelParams p(10.0);
  double defects[2];
  int k = 0;
  for (int n : {200, 400}) {
    IntegratorConfig cfg;
    cfg.steps_per_delay = n;
    cfg.t_end = 10.0;
    const auto res = integrate(p, HistoryFunction::cosine(10.0, 1.0, 0.005, n), cfg);
    defects[k++] = w_crosscheck(res.trajectory, res.diagnostics);
  }
  c.require(defects[0] < 1e-6, "defect(N=200) = " + fmt(defects[0]));
  c.require(defects[1] < 1e-7, "defect(N=400) = " + fmt(defects[1]));
  c.require(defects[0] / defects[1] >= 8.0,
            "defect ratio " + fmt(defects[0] / defects[1]) + " below order 3");
}

inline void crit_global_convergence(Checker& c) {
  std::mt19937_64 rng(15);
  for (double rho : {10.0, 100.0}) {
    const ModelParams p(rho);
    const double x_star = equilibria(p).second;
    IntegratorConfig cfg;
    cfg.t_end = rho > 50.0 ? 4000.0 : 200.0;
    cfg.record_diagnostics = false;
    for (int it = 0; it < 20; ++it) {
      const auto phi =
          random_omega_history(rng, rho, 200, 0.15 + 0.8 * (it / 20.0));
      const auto res = integrate(p, phi, cfg);
      const auto& x = res.trajectory.values();
      c.require(std::abs(x.back() - x_star) < 1e-4,
                "terminal gap " + fmt(std::abs(x.back() - x_star)) +
                    " at rho=" + fmt(rho));
      double late_min = x.back();
      for (std::size_t i = x.size() / 2; i < x.size(); ++i)
        late_min = std::min(late_min, x[i]);
      c.require(late_min > 0.0, "late minimum not positive at rho=" + fmt(rho));
    }
  }
}

inline void crit_metastability(Checker& c) {
  const ModelParams p(100.0);
  IntegratorConfig cfg;
  cfg.t_end = 420.0;
  cfg.record_diagnostics = false;
  const auto res =
      integrate(p, HistoryFunction::cosine(10.0, 1.0, 0.005, 200), cfg);
  const double x_star = equilibria(p).second;

  const auto early = transient_diagnostics(res.trajectory, 40.0, 60.0, p);
  c.require(std::abs(early.dominant_period - 1.0) <= 0.1,
            "dominant period " + fmt(early.dominant_period));

  const auto late = transient_diagnostics(res.trajectory, 400.0, 420.0, p);
  auto amplitude = [&](const TransientDiagnostics& d) {
    double a = 0.0;
    for (double v : d.peak_values) a = std::max(a, v - x_star);
    return a;
  };
  c.require(amplitude(late) < amplitude(early),
            "late envelope " + fmt(amplitude(late)) + " not below early " +
                fmt(amplitude(early)));

  // envelope decay vs the linearized rate, measured on the late window
  // where the leading pair dominates
  const auto span = transient_diagnostics(res.trajectory, 200.0, 420.0, p);
  const double re = std::abs(span.leading_pair.real());
  const double rate = std::abs(span.envelope_rate);
  c.require(rate >= 0.5 * re && rate <= 2.0 * re,
            "envelope rate " + fmt(span.envelope_rate) + " vs Re(pair) " +
                fmt(span.leading_pair.real()));
}

inline void crit_heteroclinic(Checker& c) {
  const ModelParams p(20.0);
  IntegratorConfig cfg;
  cfg.t_end = 300.0;
  cfg.record_diagnostics = false;
  const auto res = heteroclinic(p, 1e-5, cfg);
  c.require(std::abs(res.fitted_growth - res.lambda0) <=
                0.02 * res.lambda0,
            "fitted growth " + fmt(res.fitted_growth) + " vs lambda0 " +
                fmt(res.lambda0));
  c.require(res.terminal_gap < 1e-6, "terminal gap " + fmt(res.terminal_gap));

  const auto half = heteroclinic(p, 0.5e-5, cfg);
  const double x_half = equilibria(p).second / 2.0;
  auto crossing = [&](const Trajectory& t) {
    const auto& x = t.values();
    const auto n0 = static_cast<std::size_t>(t.steps_per_delay());
    for (std::size_t i = n0; i < x.size(); ++i)
      if (x[i] > x_half) return static_cast<double>(i - n0) * t.step();
    return -1.0;
  };
  const double shift =
      crossing(half.trajectory) - crossing(res.trajectory);
  const double expected = std::log(2.0) / res.lambda0;
  c.require(std::abs(shift - expected) <= 0.05 * expected,
            "c-halving shift " + fmt(shift) + " vs ln2/lambda0 " +
                fmt(expected));
}

inline void crit_abm_vs_meanfield(Checker& c) {
  LatticeParams lp;
  lp.n_dims = 2;
  lp.side = 100;
  lp.seeding = 0.05;
  lp.switch_rate = 1.0;
  lp.cycle_delay = 1.0;
  lp.motility_rate = 10.0;

  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 20; ++i)
    seeds.push_back(derive_seed(20260811, i));
  const auto es = abm_ensemble(lp, seeds, 10.0, 0.5, 2);

  MeanFieldParams mf;
  mf.r = 1.0;
  mf.tau = 1.0;
  mf.K = static_cast<double>(lp.sites());
  mf.m0 = lp.seeding * mf.K;
  IntegratorConfig cfg;
  cfg.t_end = 10.0;
  const auto sol = mean_field_integrate(mf, cfg);

  for (double t : {2.0, 5.0, 10.0}) {
    std::size_t ik = 0;
    while (ik < es.times.size() && es.times[ik] < t - 1e-9) ++ik;
    std::size_t jk = 0;
    while (jk < sol.times.size() && sol.times[jk] < t - 1e-9) ++jk;
    const double sim = es.total_mean[ik];
    const double mfv = (sol.m[jk] + sol.p[jk]) / mf.K;
    c.require(std::abs(sim - mfv) <= 0.10 * mfv,
              "t=" + fmt(t) + ": ensemble " + fmt(sim) + " vs mean-field " +
                  fmt(mfv));
  }

  LatticeParams full = lp;
  full.side = 40;
  full.seeding = 1.0;
  const auto run = abm_run(full, 1, 2.0, 0.25);
  for (double v : run.total_density)
    c.require(v == 1.0, "full lattice density " + fmt(v) + " != 1");
}

inline void crit_rescaling(Checker& c) {
  MeanFieldParams mf;
  mf.r = 1.2;
  mf.tau = 2.0;
  mf.K = 500.0;
  mf.m0 = 25.0;
  IntegratorConfig cfg_dim;
  cfg_dim.t_end = 80.0;
  const auto dim = mean_field_integrate(mf, cfg_dim);

  IntegratorConfig cfg_nd;
  cfg_nd.t_end = 40.0;
  cfg_nd.record_diagnostics = false;
  const auto nd =
      integrate_seeded(ModelParams(mf.r * mf.tau), mf.m0 / mf.K, cfg_nd);
  const auto& x = nd.trajectory.values();
  const auto n0 = static_cast<std::size_t>(nd.trajectory.steps_per_delay());
  double worst = 0.0;
  for (std::size_t k = 0; k < dim.m.size(); ++k)
    worst = std::max(worst, std::abs(dim.m[k] / mf.K - x[n0 + k]));
  c.require(worst < 2e-3, "rescaled sup distance " + fmt(worst));
}

}  // namespace detail

/// Run the acceptance criteria (all, or the listed subset) and return one
/// result per criterion.
inline std::vector<CriterionResult> run_all(const std::vector<int>& only = {}) {
  using Fn = std::function<void(detail::Checker&)>;
  const std::vector<std::pair<std::string, Fn>> criteria = {
      {"equilibria fixed by rhs and integrator", detail::crit_equilibria},
      {"characteristic factorization identity", detail::crit_factorization},
      {"rho=20 eigenvalues match reported values", detail::crit_reported_eigenvalues},
      {"stability thresholds and unstable-count jumps", detail::crit_thresholds},
      {"spectral approach to the imaginary axis", detail::crit_spectral_limit},
      {"Omega invariance and theta -> 1", detail::crit_invariance},
      {"w-formula cross-check at two resolutions", detail::crit_w_formula},
      {"global convergence and persistence", detail::crit_global_convergence},
      {"metastable period and envelope decay", detail::crit_metastability},
      {"heteroclinic launch, growth and time shift", detail::crit_heteroclinic},
      {"ABM ensemble vs mean-field density", detail::crit_abm_vs_meanfield},
      {"mean-field/non-dimensional equivalence", detail::crit_rescaling},
  };

  std::vector<CriterionResult> out;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() &&
        std::find(only.begin(), only.end(), id) == only.end())
      continue;
    CriterionResult r;
    r.id = id;
    r.name = criteria[i].first;
    const auto start = std::chrono::steady_clock::now();
    detail::Checker checker;
    try {
      criteria[i].second(checker);
      r.pass = checker.pass();
      r.detail = checker.message();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    out.push_back(std::move(r));
  }
  return out;
}

inline int print_report(const std::vector<CriterionResult>& results,
                        std::ostream& os) {
  int failures = 0;
  for (const auto& r : results) {
    os << (r.pass ? "PASS" : "FAIL") << "  " << r.id << ". " << r.name << " ("
       << detail::fmt(r.seconds) << " s)";
    if (!r.pass) {
      os << "  -- " << r.detail;
      ++failures;
    }
    os << '\n';
  }
  if (failures == 0)
    os << "all criteria passed\n";
  else
    os << failures << " criteria failed\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace gogrow::acceptance
