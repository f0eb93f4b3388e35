#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "gogrow/integrate.hpp"
#include "test_support.hpp"

using namespace gogrow;
using Catch::Approx;

TEST_CASE("config validation") {
  IntegratorConfig bad;
  bad.steps_per_delay = 15;
  CHECK_THROWS_AS(bad.validate(), invalid_input_error);
  bad.steps_per_delay = 18;
  bad.t_end = 0.0;
  CHECK_THROWS_AS(bad.validate(), invalid_input_error);
}

TEST_CASE("equilibria are fixed points of the scheme") {
  SECTION("positive equilibrium, rho = 7") {
    const ModelParams p(7.0);
    IntegratorConfig cfg;
    cfg.t_end = 50.0;
    const auto res = integrate(p, HistoryFunction::constant(0.125, 200), cfg);
    double worst = 0.0;
    for (double v : res.trajectory.values())
      worst = std::max(worst, std::abs(v - 0.125));
    CHECK(worst <= 1e-12);
  }

  SECTION("zero stays zero") {
    const ModelParams p(3.0);
    IntegratorConfig cfg;
    cfg.t_end = 10.0;
    const auto res = integrate(p, HistoryFunction::constant(0.0, 200), cfg);
    for (double v : res.trajectory.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("transient converges to the positive equilibrium (rho = 10)") {
  const ModelParams p(10.0);
  IntegratorConfig cfg;
  cfg.t_end = 60.0;
  const auto phi = HistoryFunction::cosine(10.0, 1.0, 0.005, 200);
  const auto res = integrate(p, phi, cfg);
  CHECK(std::abs(res.trajectory.values().back() - 1.0 / 11.0) < 1e-3);
}

TEST_CASE("too-coarse grids are caught by the in-band check") {
  const ModelParams p(100.0);
  IntegratorConfig cfg;
  cfg.steps_per_delay = 16;
  cfg.t_end = 30.0;
  CHECK_THROWS_AS(
      integrate(p, HistoryFunction::cosine(10.0, 1.0, 0.005, 16), cfg),
      invariance_violation_error);
}

TEST_CASE("history is resampled onto the integrator grid") {
  const ModelParams p(10.0);
  IntegratorConfig cfg;
  cfg.t_end = 60.0;
  const auto phi = HistoryFunction::cosine(10.0, 1.0, 0.005, 40);
  const auto res = integrate(p, phi, cfg);
  CHECK(res.trajectory.steps_per_delay() == 200);
  CHECK(std::abs(res.trajectory.values().back() - 1.0 / 11.0) < 1e-3);
}

TEST_CASE("out-of-Omega starts are integrated with a flag") {
  const ModelParams p(1.0);
  IntegratorConfig cfg;
  cfg.t_end = 5.0;
  const auto res = integrate(p, HistoryFunction::constant(1.0, 200), cfg);
  CHECK_FALSE(res.trajectory.from_omega());
  CHECK(res.trajectory.values().back() > 0.0);
}

TEST_CASE("Omega forward invariance, monotone theta, theta -> 1") {
  std::mt19937_64 rng(99);
  IntegratorConfig cfg;
  cfg.t_end = 80.0;
  for (double rho : {1.0, 10.0, 100.0}) {
    const ModelParams p(rho);
    for (int it = 0; it < 10; ++it) {
      const auto phi = testsupport::random_omega_history(
          rng, rho, 200, 0.2 + 0.7 * (it / 10.0));
      const auto res = integrate(p, phi, cfg);
      REQUIRE(res.trajectory.from_omega());
      // the bound applies to the solution; history values may exceed 1
      // pointwise as long as theta(phi) <= 1
      const auto& xs = res.trajectory.values();
      const auto n0 =
          static_cast<std::size_t>(res.trajectory.steps_per_delay());
      for (std::size_t i = n0; i < xs.size(); ++i) {
        CHECK(xs[i] >= -1e-9);
        CHECK(xs[i] <= 1.0 + 1e-9);
      }
      const auto& th = res.diagnostics.theta;
      for (std::size_t k = 1; k < th.size(); ++k)
        CHECK(th[k] >= th[k - 1] - 1e-10);
      for (double t : res.diagnostics.theta) CHECK(t <= 1.0 + 1e-9);
      CHECK(std::abs(th.back() - 1.0) < 1e-6);

      // w decays exponentially at least at rho * (observed floor): by the
      // w identity the decay rate is rho times the running mean of x(t-1)
      const auto& w = res.diagnostics.w;
      std::vector<double> ts, logw;
      double floor_x = 1.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (!(w[k] > 1e-250 && w[k] < 0.5)) continue;
        ts.push_back(res.diagnostics.times[k]);
        logw.push_back(std::log(w[k]));
        floor_x = std::min(floor_x, xs[k]);  // x(t_k - 1)
      }
      if (ts.size() >= 5 && floor_x > 0.0) {
        const double rate = -testsupport::fit_slope(ts, logw);
        CHECK(rate >= rho * floor_x * 0.9);
      }
    }
  }
}

TEST_CASE("self-convergence at fourth order") {
  const ModelParams p(2.0);
  auto smooth = [](double s) { return 0.1 * (std::cos(3.0 * s) + 1.0); };
  std::vector<std::vector<double>> runs;
  std::vector<int> ns = {64, 128, 256};
  for (int n : ns) {
    IntegratorConfig cfg;
    cfg.steps_per_delay = n;
    cfg.t_end = 5.0;
    cfg.record_diagnostics = false;
    runs.push_back(
        integrate(p, HistoryFunction::from_function(smooth, n), cfg)
            .trajectory.values());
  }
  // sup difference on the shared nodes of [4, 5]
  auto supdiff = [&](const std::vector<double>& coarse,
                     const std::vector<double>& fine, int nc) {
    double worst = 0.0;
    for (int i = 5 * nc; i <= 6 * nc; ++i)
      worst = std::max(worst, std::abs(coarse[static_cast<std::size_t>(i)] -
                                       fine[static_cast<std::size_t>(2 * i)]));
    return worst;
  };
  const double e1 = supdiff(runs[0], runs[1], ns[0]);
  const double e2 = supdiff(runs[1], runs[2], ns[1]);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("dense output is fourth order at off-grid points") {
  const ModelParams p(2.0);
  auto smooth = [](double s) { return 0.1 * (std::cos(3.0 * s) + 1.0); };
  IntegratorConfig ref_cfg;
  ref_cfg.steps_per_delay = 1024;
  ref_cfg.t_end = 3.0;
  ref_cfg.record_diagnostics = false;
  const auto ref =
      integrate(p, HistoryFunction::from_function(smooth, 1024), ref_cfg);

  double errs[2];
  int k = 0;
  for (int n : {64, 128}) {
    IntegratorConfig cfg;
    cfg.steps_per_delay = n;
    cfg.t_end = 3.0;
    cfg.record_diagnostics = false;
    const auto run =
        integrate(p, HistoryFunction::from_function(smooth, n), cfg);
    double worst = 0.0;
    for (int i = 0; i < 3000; ++i) {
      const double t = -1.0 + 4.0 * (i + 0.5) / 3000.0;
      worst = std::max(worst,
                       std::abs(run.trajectory.eval(t) - ref.trajectory.eval(t)));
    }
    errs[k++] = worst;
  }
  CHECK(errs[0] < 1e-7);
  CHECK(errs[1] < 1e-8);
  CHECK(errs[0] / errs[1] > 10.0);
  CHECK(errs[0] / errs[1] < 24.0);
}

TEST_CASE("w formula cross-check") {
  SECTION("equilibrium start has zero defect") {
    const ModelParams p(5.0);
    IntegratorConfig cfg;
    cfg.t_end = 10.0;
    const auto res =
        integrate(p, HistoryFunction::constant(1.0 / 6.0, 200), cfg);
    CHECK(w_crosscheck(res.trajectory, res.diagnostics) < 1e-12);
  }

  SECTION("oscillatory start, defect shrinks at order four") {
    const ModelParams p(10.0);
    double defects[2];
    int k = 0;
    for (int n : {200, 400}) {
      IntegratorConfig cfg;
      cfg.steps_per_delay = n;
      cfg.t_end = 10.0;
      const auto phi = HistoryFunction::cosine(10.0, 1.0, 0.005, n);
      const auto res = integrate(p, phi, cfg);
      defects[k++] = w_crosscheck(res.trajectory, res.diagnostics);
    }
    CHECK(defects[0] < 1e-6);
    CHECK(defects[1] < 1e-7);
    CHECK(defects[0] / defects[1] > 10.0);
    CHECK(defects[0] / defects[1] < 24.0);
  }

  SECTION("requires recorded diagnostics") {
    const ModelParams p(1.0);
    IntegratorConfig cfg;
    cfg.t_end = 2.0;
    cfg.record_diagnostics = false;
    const auto res = integrate(p, HistoryFunction::constant(0.1, 200), cfg);
    CHECK_THROWS_AS(w_crosscheck(res.trajectory, res.diagnostics),
                    invalid_input_error);
  }
}

TEST_CASE("mean-field system") {
  SECTION("empty lattice stays empty") {
    MeanFieldParams mf;
    mf.r = 1.0;
    mf.tau = 1.0;
    mf.K = 100.0;
    mf.m0 = 0.0;
    IntegratorConfig cfg;
    cfg.t_end = 5.0;
    const auto sol = mean_field_integrate(mf, cfg);
    for (double v : sol.m) CHECK(v == 0.0);
    for (double v : sol.p) CHECK(v == 0.0);
  }

  SECTION("integrated p agrees with its quadrature route") {
    MeanFieldParams mf;
    mf.r = 1.0;
    mf.tau = 1.0;
    mf.K = 1.0;
    mf.m0 = 0.05;
    IntegratorConfig cfg;
    cfg.t_end = 40.0;
    const auto sol = mean_field_integrate(mf, cfg);
    double worst = 0.0;
    for (std::size_t k = 0; k < sol.p.size(); ++k)
      worst = std::max(worst, std::abs(sol.p[k] - sol.p_check[k]));
    CHECK(worst < 1e-8);
  }

  SECTION("rescaling maps the dimensional run onto the dimensionless one") {
    MeanFieldParams mf;
    mf.r = 1.2;
    mf.tau = 2.0;
    mf.K = 500.0;
    mf.m0 = 25.0;
    IntegratorConfig cfg_dim;
    cfg_dim.t_end = 80.0;  // 40 delay units
    const auto dim = mean_field_integrate(mf, cfg_dim);

    IntegratorConfig cfg_nd;
    cfg_nd.t_end = 40.0;
    const auto nd = integrate_seeded(ModelParams(mf.r * mf.tau),
                                     mf.m0 / mf.K, cfg_nd);
    const auto& x = nd.trajectory.values();
    const auto n0 = static_cast<std::size_t>(nd.trajectory.steps_per_delay());
    REQUIRE(dim.m.size() == x.size() - n0);
    double worst = 0.0;
    for (std::size_t k = 0; k < dim.m.size(); ++k)
      worst = std::max(worst, std::abs(dim.m[k] / mf.K - x[n0 + k]));
    CHECK(worst < 2e-3);
  }

  SECTION("parameter validation") {
    MeanFieldParams mf;
    mf.m0 = 2.0;
    mf.K = 1.0;
    CHECK_THROWS_AS(mean_field_integrate(mf, IntegratorConfig{}),
                    invalid_input_error);
  }
}

TEST_CASE("persistence floor") {
  SECTION("equilibrium family floors at x_*") {
    const ModelParams p(4.0);
    IntegratorConfig cfg;
    cfg.t_end = 20.0;
    const double floor_value =
        persistence_floor(p, {HistoryFunction::constant(0.2, 200)}, cfg);
    CHECK(floor_value == Approx(0.2).margin(1e-12));
  }

  SECTION("random feasible starts stay above a positive floor (rho = 10)") {
    std::mt19937_64 rng(333);
    const ModelParams p(10.0);
    std::vector<HistoryFunction> set;
    for (int i = 0; i < 20; ++i)
      set.push_back(
          testsupport::random_omega_history(rng, 10.0, 200, 0.1 + 0.04 * i));
    IntegratorConfig cfg;
    cfg.t_end = 100.0;
    cfg.record_diagnostics = false;
    const double floor_value = persistence_floor(p, set, cfg);
    CHECK(floor_value > 0.0);
    CHECK(std::abs(floor_value - 1.0 / 11.0) < 0.1 / 11.0 * 1.1);
  }

  SECTION("positive floor through the metastable regime (rho = 100)") {
    std::mt19937_64 rng(12);
    const ModelParams p(100.0);
    std::vector<HistoryFunction> set;
    for (int i = 0; i < 20; ++i)
      set.push_back(
          testsupport::random_omega_history(rng, 100.0, 200, 0.2 + 0.035 * i));
    IntegratorConfig cfg;
    cfg.t_end = 100.0;
    cfg.record_diagnostics = false;
    CHECK(persistence_floor(p, set, cfg) > 0.0);
  }

  SECTION("rejects infeasible members") {
    const ModelParams p(1.0);
    CHECK_THROWS_AS(
        persistence_floor(p, {HistoryFunction::constant(0.0, 200)},
                          IntegratorConfig{}),
        invalid_input_error);
  }
}
