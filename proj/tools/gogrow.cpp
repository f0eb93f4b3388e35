// Command-line front end: simulate | meanfield | abm | spectrum | chart |
// heteroclinic | gallery | accept.
//
// Exit codes: 0 success, 2 usage error, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gogrow/acceptance.hpp"
#include "gogrow/gogrow.hpp"

namespace {

constexpr std::uint64_t kDefaultMasterSeed = 20260811ULL;

std::uint64_t master_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("GOGROW_SEED"))
    return std::strtoull(env, nullptr, 10);
  return kDefaultMasterSeed;
}

int with_output(const std::string& path,
                const std::function<void(std::ostream&)>& emit) {
  if (path.empty()) {
    emit(std::cout);
    return 0;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    std::cerr << "gogrow: cannot open output file '" << path << "'\n";
    return 2;
  }
  emit(os);
  return 0;
}

struct PhiSpec {
  std::string kind = "cos";  // cos | const
  double a = 10.0;
  double b = 1.0;
  double scale = 0.005;
  double value = 0.0;

  gogrow::HistoryFunction build(int n) const {
    if (kind == "cos") return gogrow::HistoryFunction::cosine(a, b, scale, n);
    if (kind == "const") return gogrow::HistoryFunction::constant(value, n);
    throw gogrow::invalid_input_error("unknown phi family '" + kind + "'");
  }
};

void add_phi_options(CLI::App* cmd, PhiSpec& phi) {
  cmd->add_option("--phi", phi.kind, "initial function family: cos | const")
      ->check(CLI::IsMember({"cos", "const"}));
  cmd->add_option("--a", phi.a, "cosine frequency a in cos(a t^b)");
  cmd->add_option("--b", phi.b, "cosine argument power b");
  cmd->add_option("--scale", phi.scale, "cosine amplitude s in s(cos+1)");
  cmd->add_option("--value", phi.value, "constant value (phi = const)");
}

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const gogrow::invalid_input_error& e) {
    std::cerr << "gogrow: " << e.what() << '\n';
    return 2;
  } catch (const gogrow::error& e) {
    std::cerr << "gogrow: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "gogrow: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"go-or-grow delayed logistic toolkit"};
  app.require_subcommand(1);

  // --- simulate -----------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "integrate the delayed logistic equation");
  double sim_rho = 0.0;
  PhiSpec sim_phi;
  int sim_steps = 200;
  double sim_tend = 60.0;
  std::string sim_out, sim_format = "csv";
  sim->add_option("--rho", sim_rho, "dimensionless parameter rho = r tau")->required();
  add_phi_options(sim, sim_phi);
  sim->add_option("--steps", sim_steps, "grid steps per delay unit (even)");
  sim->add_option("--t-end", sim_tend, "final time in delay units");
  sim->add_option("--out", sim_out, "output path (default stdout)");
  sim->add_option("--format", sim_format)->check(CLI::IsMember({"csv"}));

  // --- meanfield ------------------------------------------------------------
  auto* mfc = app.add_subcommand("meanfield", "integrate the dimensional mean-field system");
  gogrow::MeanFieldParams mf;
  int mf_steps = 200;
  double mf_tend = 40.0;
  std::string mf_out, mf_format = "csv";
  mfc->add_option("--r", mf.r, "switching rate")->required();
  mfc->add_option("--tau", mf.tau, "cell-cycle delay")->required();
  mfc->add_option("--K", mf.K, "carrying capacity (site count)")->required();
  mfc->add_option("--m0", mf.m0, "initial motile density")->required();
  mfc->add_option("--steps", mf_steps, "grid steps per delay");
  mfc->add_option("--t-end", mf_tend, "final time");
  mfc->add_option("--out", mf_out, "output path (default stdout)");
  mfc->add_option("--format", mf_format)->check(CLI::IsMember({"csv"}));

  // --- abm ------------------------------------------------------------------
  auto* abm = app.add_subcommand("abm", "stochastic lattice simulation");
  gogrow::LatticeParams lp;
  std::string abm_config;
  int abm_runs = 1, abm_threads = 1;
  double abm_tend = 10.0, abm_dt = 0.5;
  std::optional<std::uint64_t> abm_seed;
  std::string abm_out, abm_format = "csv";
  abm->add_option("--config", abm_config, "key=value config file (LatticeParams keys)");
  auto* o_dims = abm->add_option("--dims", lp.n_dims, "lattice dimension (1-3)");
  auto* o_side = abm->add_option("--side", lp.side, "sites per dimension");
  auto* o_spacing = abm->add_option("--spacing", lp.spacing, "lattice spacing Delta");
  auto* o_seeding = abm->add_option("--seeding", lp.seeding, "seeding probability P_s");
  auto* o_switch = abm->add_option("--switch-rate", lp.switch_rate, "phenotype switch rate r");
  auto* o_delay = abm->add_option("--cycle-delay", lp.cycle_delay, "cell-cycle delay tau");
  auto* o_mot = abm->add_option("--motility-rate", lp.motility_rate, "movement rate");
  abm->add_option("--runs", abm_runs, "ensemble size (1 = single run)");
  abm->add_option("--threads", abm_threads, "parallel ensemble workers");
  abm->add_option("--t-end", abm_tend, "final time");
  abm->add_option("--record-dt", abm_dt, "recording interval");
  abm->add_option("--seed", abm_seed, "master seed (overrides GOGROW_SEED)");
  abm->add_option("--out", abm_out, "output path (default stdout)");
  abm->add_option("--format", abm_format)->check(CLI::IsMember({"csv"}));

  // --- spectrum ---------------------------------------------------------------
  auto* spect = app.add_subcommand("spectrum", "characteristic roots in a rectangle");
  double sp_rho = 0.0;
  std::string sp_eq = "star";
  gogrow::Rect sp_rect{-5.0, 3.0, -0.05, 3.0 * std::numbers::pi};
  int sp_max = 64;
  std::string sp_out, sp_format = "json";
  spect->add_option("--rho", sp_rho, "dimensionless parameter")->required();
  spect->add_option("--equilibrium", sp_eq, "zero | star | reduced")
      ->check(CLI::IsMember({"zero", "star", "reduced"}));
  spect->add_option("--re-min", sp_rect.re_min);
  spect->add_option("--re-max", sp_rect.re_max);
  spect->add_option("--im-min", sp_rect.im_min);
  spect->add_option("--im-max", sp_rect.im_max);
  spect->add_option("--max-roots", sp_max);
  spect->add_option("--out", sp_out, "output path (default stdout)");
  spect->add_option("--format", sp_format)->check(CLI::IsMember({"json", "csv"}));

  // --- chart -------------------------------------------------------------------
  auto* chart = app.add_subcommand("chart", "stability-boundary curve C_j^-");
  int ch_j = 1, ch_samples = 200;
  std::string ch_out, ch_format = "csv";
  chart->add_option("--j", ch_j, "curve index (>= 1)");
  chart->add_option("--samples", ch_samples, "number of nu samples");
  chart->add_option("--out", ch_out, "output path (default stdout)");
  chart->add_option("--format", ch_format)->check(CLI::IsMember({"csv"}));

  // --- heteroclinic --------------------------------------------------------------
  auto* het = app.add_subcommand("heteroclinic", "connecting-orbit launch from the zero equilibrium");
  double het_rho = 20.0, het_c = 1e-5, het_tend = 300.0;
  int het_steps = 200;
  std::string het_out, het_format = "json";
  het->add_option("--rho", het_rho)->required();
  het->add_option("--c", het_c, "launch amplitude along the leading eigenfunction");
  het->add_option("--t-end", het_tend);
  het->add_option("--steps", het_steps);
  std::string het_traj_path;
  het->add_option("--out", het_out, "output path (default stdout)");
  het->add_option("--format", het_format)->check(CLI::IsMember({"json"}));
  het->add_option("--trajectory-out", het_traj_path,
                  "also write the trajectory CSV here");

  // --- gallery ---------------------------------------------------------------------
  auto* gal = app.add_subcommand("gallery", "waveform gallery for the standard initial functions");
  double gal_rho = 100.0, gal_tend = 60.0;
  int gal_steps = 200;
  std::string gal_dir = ".";
  gal->add_option("--rho", gal_rho);
  gal->add_option("--t-end", gal_tend);
  gal->add_option("--steps", gal_steps);
  gal->add_option("--out", gal_dir, "output directory");

  // --- accept -----------------------------------------------------------------------
  auto* acc = app.add_subcommand("accept", "run the acceptance suite");
  std::vector<int> acc_only;
  std::string acc_out;
  acc->add_option("--only", acc_only, "criterion ids to run (default all)");
  acc->add_option("--out", acc_out, "write the report here as well");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (sim->parsed()) {
    return run_guarded([&] {
      gogrow::IntegratorConfig cfg;
      cfg.steps_per_delay = sim_steps;
      cfg.t_end = sim_tend;
      const auto res = gogrow::integrate(gogrow::ModelParams(sim_rho),
                                         sim_phi.build(sim_steps), cfg);
      if (!res.trajectory.from_omega())
        std::cerr << "gogrow: warning: initial function is not in Omega\n";
      return with_output(sim_out, [&](std::ostream& os) {
        gogrow::write_trajectory_csv(os, res);
      });
    });
  }

  if (mfc->parsed()) {
    return run_guarded([&] {
      gogrow::IntegratorConfig cfg;
      cfg.steps_per_delay = mf_steps;
      cfg.t_end = mf_tend;
      const auto sol = gogrow::mean_field_integrate(mf, cfg);
      return with_output(mf_out, [&](std::ostream& os) {
        gogrow::write_meanfield_csv(os, sol);
      });
    });
  }

  if (abm->parsed()) {
    return run_guarded([&] {
      if (!abm_config.empty()) {
        std::ifstream in(abm_config);
        if (!in) {
          std::cerr << "gogrow: cannot read config '" << abm_config << "'\n";
          return 2;
        }
        gogrow::LatticeParams from_file = gogrow::parse_lattice_config(in);
        // explicit flags override file values
        if (!*o_dims) lp.n_dims = from_file.n_dims;
        if (!*o_side) lp.side = from_file.side;
        if (!*o_spacing) lp.spacing = from_file.spacing;
        if (!*o_seeding) lp.seeding = from_file.seeding;
        if (!*o_switch) lp.switch_rate = from_file.switch_rate;
        if (!*o_delay) lp.cycle_delay = from_file.cycle_delay;
        if (!*o_mot) lp.motility_rate = from_file.motility_rate;
      }
      lp.validate();
      const std::uint64_t seed0 = master_seed(abm_seed);
      if (abm_runs < 1)
        throw gogrow::invalid_input_error("abm: --runs must be >= 1");
      if (abm_runs == 1) {
        const auto run = gogrow::abm_run(lp, gogrow::derive_seed(seed0, 0),
                                         abm_tend, abm_dt);
        return with_output(abm_out, [&](std::ostream& os) {
          gogrow::write_density_csv(os, run);
        });
      }
      std::vector<std::uint64_t> seeds;
      for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(abm_runs); ++i)
        seeds.push_back(gogrow::derive_seed(seed0, i));
      const auto es =
          gogrow::abm_ensemble(lp, seeds, abm_tend, abm_dt, abm_threads);
      return with_output(abm_out, [&](std::ostream& os) {
        gogrow::write_ensemble_csv(os, es);
      });
    });
  }

  if (spect->parsed()) {
    return run_guarded([&] {
      const gogrow::EquilibriumTag tag =
          sp_eq == "zero" ? gogrow::EquilibriumTag::at_zero
          : sp_eq == "star" ? gogrow::EquilibriumTag::at_star
                            : gogrow::EquilibriumTag::reduced;
      const auto roots = gogrow::find_roots(tag, gogrow::ModelParams(sp_rho),
                                            sp_rect, sp_max);
      return with_output(sp_out, [&](std::ostream& os) {
        if (sp_format == "csv")
          gogrow::write_roots_csv(os, roots);
        else
          os << gogrow::roots_json(sp_rho, tag, roots).dump(2) << '\n';
      });
    });
  }

  if (chart->parsed()) {
    return run_guarded([&] {
      const auto c = gogrow::make_stability_chart(ch_j, ch_samples);
      return with_output(ch_out, [&](std::ostream& os) {
        gogrow::write_chart_csv(os, c);
      });
    });
  }

  if (het->parsed()) {
    return run_guarded([&] {
      gogrow::IntegratorConfig cfg;
      cfg.steps_per_delay = het_steps;
      cfg.t_end = het_tend;
      const auto res =
          gogrow::heteroclinic(gogrow::ModelParams(het_rho), het_c, cfg);
      if (!het_traj_path.empty()) {
        std::ofstream ts(het_traj_path, std::ios::binary);
        if (!ts) {
          std::cerr << "gogrow: cannot open '" << het_traj_path << "'\n";
          return 2;
        }
        gogrow::IntegrationResult ir{res.trajectory, res.diagnostics};
        gogrow::write_trajectory_csv(ts, ir);
      }
      return with_output(het_out, [&](std::ostream& os) {
        os << gogrow::heteroclinic_json(het_rho, res).dump(2) << '\n';
      });
    });
  }

  if (gal->parsed()) {
    return run_guarded([&] {
      gogrow::IntegratorConfig cfg;
      cfg.steps_per_delay = gal_steps;
      cfg.t_end = gal_tend;
      const auto entries =
          gogrow::shape_gallery(gogrow::ModelParams(gal_rho), {}, cfg);
      std::filesystem::create_directories(gal_dir);
      nlohmann::json index;
      index["rho"] = gal_rho;
      index["entries"] = nlohmann::json::array();
      for (const auto& e : entries) {
        const std::string csv_name = "phi_" + e.name + ".csv";
        std::ofstream os(std::filesystem::path(gal_dir) / csv_name,
                         std::ios::binary);
        if (!os) {
          std::cerr << "gogrow: cannot write gallery CSV\n";
          return 2;
        }
        gogrow::IntegrationResult ir{e.trajectory, e.diagnostics};
        gogrow::write_trajectory_csv(os, ir);
        nlohmann::json entry{{"name", e.name}, {"csv", csv_name}};
        if (e.transient) {
          entry["dominant_period"] = e.transient->dominant_period;
          entry["envelope_rate"] = e.transient->envelope_rate;
        }
        index["entries"].push_back(entry);
      }
      std::ofstream os(std::filesystem::path(gal_dir) / "index.json",
                       std::ios::binary);
      os << index.dump(2) << '\n';
      return 0;
    });
  }

  if (acc->parsed()) {
    return run_guarded([&] {
      const auto results = gogrow::acceptance::run_all(acc_only);
      if (!acc_out.empty()) {
        std::ofstream os(acc_out, std::ios::binary);
        if (!os) {
          std::cerr << "gogrow: cannot open '" << acc_out << "'\n";
          return 2;
        }
        gogrow::acceptance::print_report(results, os);
      }
      return gogrow::acceptance::print_report(results, std::cout);
    });
  }

  return 2;
}
