// End-to-end checks of the command-line front end: exit codes, file formats
// and reproducibility. The binary path comes from GOGROW_CLI_BIN (set by the
// test harness).
#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gogrow/spectral.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code;
  std::string out;
};

std::string cli_bin() {
  const char* p = std::getenv("GOGROW_CLI_BIN");
  REQUIRE(p != nullptr);
  return p;
}

fs::path scratch_dir() {
  static fs::path dir = [] {
    auto d = fs::temp_directory_path() / "gogrow_cli_test";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CliResult run_cli(const std::string& args) {
  const fs::path out = scratch_dir() / "stdout.txt";
  const std::string cmd =
      cli_bin() + " " + args + " > " + out.string() + " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WEXITSTATUS(status);
  std::ifstream in(out);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> parse_csv(const std::string& text,
                                           std::size_t cols) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    REQUIRE(row.size() == cols);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli("simulate --t-end 5").exit_code == 2);           // missing rho
  CHECK(run_cli("simulate --rho 1 --phi sine").exit_code == 2);  // bad family
  CHECK(run_cli("nonsense").exit_code == 2);
  CHECK(run_cli("simulate --rho 1 --format json").exit_code == 2);
  CHECK(run_cli("simulate --rho -3").exit_code == 2);
}

TEST_CASE("simulate: constant equilibrium run") {
  const auto r =
      run_cli("simulate --rho 1 --phi const --value 0.5 --t-end 10");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.rfind("t,x,theta,w,I\n", 0) == 0);
  const auto rows = parse_csv(r.out, 5);
  REQUIRE(rows.size() == 2001);
  for (const auto& row : rows) {
    CHECK(row[1] == 0.5);       // x
    CHECK(std::abs(row[2] - 1.0) < 1e-12);  // theta
  }
}

TEST_CASE("simulate: byte-identical reruns") {
  const fs::path a = scratch_dir() / "fig1_a.csv";
  const fs::path b = scratch_dir() / "fig1_b.csv";
  const std::string args =
      "simulate --rho 50 --phi cos --a 10 --scale 0.005 --t-end 20 --out ";
  REQUIRE(run_cli(args + a.string()).exit_code == 0);
  REQUIRE(run_cli(args + b.string()).exit_code == 0);
  const std::string ca = slurp(a), cb = slurp(b);
  CHECK(!ca.empty());
  CHECK(ca == cb);
}

TEST_CASE("simulate: 17 significant digits survive a round-trip") {
  const auto r = run_cli("simulate --rho 3 --phi cos --t-end 2");
  REQUIRE(r.exit_code == 0);
  const auto rows = parse_csv(r.out, 5);
  // theta + w must reconstruct 1 exactly from the printed digits
  for (const auto& row : rows) CHECK(std::abs(row[2] + row[3] - 1.0) < 1e-15);
}

TEST_CASE("meanfield CSV") {
  const auto r =
      run_cli("meanfield --r 1 --tau 1 --K 1 --m0 0.05 --t-end 10");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.rfind("t,m,p,p_check\n", 0) == 0);
  const auto rows = parse_csv(r.out, 4);
  for (const auto& row : rows) CHECK(std::abs(row[2] - row[3]) < 1e-8);
}

TEST_CASE("spectrum JSON matches the library") {
  const auto r = run_cli(
      "spectrum --rho 20 --equilibrium star --re-min -1 --re-max 1 "
      "--im-min 0 --im-max 10");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["rho"] == 20.0);
  CHECK(j["equilibrium"] == "at_star");
  REQUIRE(!j["roots"].empty());

  const auto roots =
      gogrow::find_roots(gogrow::EquilibriumTag::at_star,
                         gogrow::ModelParams(20.0),
                         gogrow::Rect{-1.0, 1.0, 0.0, 10.0}, 64);
  REQUIRE(j["roots"].size() == roots.size());
  CHECK(std::abs(j["roots"][0]["re"].get<double>() -
                 roots[0].lambda.real()) < 1e-12);
  CHECK(std::abs(j["roots"][0]["im"].get<double>() -
                 roots[0].lambda.imag()) < 1e-12);
  for (const auto& root : j["roots"])
    CHECK(root["residual"].get<double>() < 1e-10);

  SECTION("csv format") {
    const auto rc = run_cli(
        "spectrum --rho 20 --equilibrium star --re-min -1 --re-max 1 "
        "--im-min 0 --im-max 10 --format csv");
    REQUIRE(rc.exit_code == 0);
    CHECK(rc.out.rfind("re,im,residual\n", 0) == 0);
  }
}

TEST_CASE("chart CSV parametrizes imaginary roots") {
  const auto r = run_cli("chart --j 1 --samples 16");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.rfind("nu,alpha,beta\n", 0) == 0);
  const auto rows = parse_csv(r.out, 3);
  REQUIRE(rows.size() == 16);
  for (const auto& row : rows) {
    const std::complex<double> z(0.0, row[0]);
    CHECK(std::abs(z - row[1] - row[2] * std::exp(-z)) < 1e-10);
  }
}

TEST_CASE("heteroclinic JSON") {
  const auto r = run_cli("heteroclinic --rho 20 --c 1e-5 --t-end 40");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["rho"] == 20.0);
  CHECK(j["c"] == 1e-5);
  CHECK(j.contains("lambda0"));
  CHECK(j.contains("fitted_growth"));
  CHECK(j.contains("terminal_gap"));
  CHECK(std::abs(j["lambda0"].get<double>() - 0.66) < 0.02);
}

TEST_CASE("abm runs and reproducibility") {
  const std::string base =
      "abm --dims 2 --side 20 --seeding 0.1 --switch-rate 1 --cycle-delay 1 "
      "--motility-rate 5 --t-end 2 --record-dt 0.5 ";

  SECTION("single run emits the density CSV") {
    const auto r = run_cli(base + "--seed 7");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.rfind("t,m_density,p_density,total_density\n", 0) == 0);
  }

  SECTION("ensemble emits mean/std columns and is seed-reproducible") {
    const auto a = run_cli(base + "--runs 4 --seed 7 --threads 2");
    const auto b = run_cli(base + "--runs 4 --seed 7 --threads 2");
    REQUIRE(a.exit_code == 0);
    CHECK(a.out.rfind("t,m_density_mean,m_density_std,p_density_mean,"
                      "p_density_std,total_density_mean,total_density_std\n",
                      0) == 0);
    CHECK(a.out == b.out);
    const auto c = run_cli(base + "--runs 4 --seed 8 --threads 2");
    CHECK(a.out != c.out);
  }

  SECTION("GOGROW_SEED sets the master seed; --seed overrides it") {
    const fs::path env_out = scratch_dir() / "env_seed.csv";
    const std::string envcmd = "GOGROW_SEED=7 " + cli_bin() + " " + base +
                               "--out " + env_out.string() + " 2> /dev/null";
    REQUIRE(WEXITSTATUS(std::system(envcmd.c_str())) == 0);
    const auto flagged = run_cli(base + "--seed 7");
    CHECK(slurp(env_out) == flagged.out);
    const std::string mixed = "GOGROW_SEED=9 " + cli_bin() + " " + base +
                              "--seed 7 --out " + env_out.string() +
                              " 2> /dev/null";
    REQUIRE(WEXITSTATUS(std::system(mixed.c_str())) == 0);
    CHECK(slurp(env_out) == flagged.out);
  }

  SECTION("config file plus flag overrides") {
    const fs::path cfg = scratch_dir() / "lattice.cfg";
    std::ofstream(cfg) << "n_dims = 2\nside = 10\nseeding = 1.0\n";
    const auto r = run_cli("abm --config " + cfg.string() +
                           " --t-end 1 --record-dt 0.5 --seed 3");
    REQUIRE(r.exit_code == 0);
    const auto rows = parse_csv(r.out, 4);
    for (const auto& row : rows) CHECK(row[3] == 1.0);  // full lattice
  }

  SECTION("bad config key is a usage error") {
    const fs::path cfg = scratch_dir() / "bad.cfg";
    std::ofstream(cfg) << "sides = 10\n";
    CHECK(run_cli("abm --config " + cfg.string()).exit_code == 2);
  }
}

TEST_CASE("gallery writes per-phi CSVs plus an index") {
  const fs::path dir = scratch_dir() / "gallery";
  const auto r = run_cli("gallery --rho 100 --t-end 25 --out " + dir.string());
  REQUIRE(r.exit_code == 0);
  const auto index = nlohmann::json::parse(slurp(dir / "index.json"));
  CHECK(index["rho"] == 100.0);
  REQUIRE(index["entries"].size() == 3);
  for (const auto& e : index["entries"]) {
    CHECK(fs::exists(dir / e["csv"].get<std::string>()));
  }
}

TEST_CASE("accept subcommand reports per-criterion lines") {
  const auto r = run_cli("accept --only 1 --only 2");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("PASS  1.") != std::string::npos);
  CHECK(r.out.find("PASS  2.") != std::string::npos);
}
