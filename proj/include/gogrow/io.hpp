#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gogrow/abm.hpp"
#include "gogrow/analysis.hpp"
#include "gogrow/integrate.hpp"
#include "gogrow/spectral.hpp"
#include "gogrow/trajectory.hpp"

namespace gogrow {

/// Floating-point cell with 17 significant digits (round-trippable).
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Trajectory plus diagnostics as CSV rows on the grid t >= 0.
inline void write_trajectory_csv(std::ostream& os,
                                 const IntegrationResult& result) {
  os << "t,x,theta,w,I\n";
  const auto& traj = result.trajectory;
  const auto& d = result.diagnostics;
  const auto n0 = static_cast<std::size_t>(traj.steps_per_delay());
  for (std::size_t k = 0; k < d.times.size(); ++k) {
    os << csv_num(d.times[k]) << ',' << csv_num(traj.values()[n0 + k]) << ','
       << csv_num(d.theta[k]) << ',' << csv_num(d.w[k]) << ','
       << csv_num(d.running_integral[k]) << '\n';
  }
}

inline void write_meanfield_csv(std::ostream& os, const MeanFieldSolution& sol) {
  os << "t,m,p,p_check\n";
  for (std::size_t k = 0; k < sol.times.size(); ++k)
    os << csv_num(sol.times[k]) << ',' << csv_num(sol.m[k]) << ','
       << csv_num(sol.p[k]) << ',' << csv_num(sol.p_check[k]) << '\n';
}

inline void write_density_csv(std::ostream& os, const DensitySeries& s) {
  os << "t,m_density,p_density,total_density\n";
  for (std::size_t k = 0; k < s.times.size(); ++k)
    os << csv_num(s.times[k]) << ',' << csv_num(s.m_density[k]) << ','
       << csv_num(s.p_density[k]) << ',' << csv_num(s.total_density[k]) << '\n';
}

inline void write_ensemble_csv(std::ostream& os, const EnsembleSeries& s) {
  os << "t,m_density_mean,m_density_std,p_density_mean,p_density_std,"
        "total_density_mean,total_density_std\n";
  for (std::size_t k = 0; k < s.times.size(); ++k)
    os << csv_num(s.times[k]) << ',' << csv_num(s.m_mean[k]) << ','
       << csv_num(s.m_std[k]) << ',' << csv_num(s.p_mean[k]) << ','
       << csv_num(s.p_std[k]) << ',' << csv_num(s.total_mean[k]) << ','
       << csv_num(s.total_std[k]) << '\n';
}

inline void write_chart_csv(std::ostream& os, const StabilityChart& chart) {
  os << "nu,alpha,beta\n";
  for (std::size_t k = 0; k < chart.nu_samples.size(); ++k)
    os << csv_num(chart.nu_samples[k]) << ','
       << csv_num(chart.alpha_beta[k].first) << ','
       << csv_num(chart.alpha_beta[k].second) << '\n';
}

inline nlohmann::json roots_json(double rho, EquilibriumTag tag,
                                 const std::vector<CharRoot>& roots) {
  nlohmann::json j;
  j["rho"] = rho;
  j["equilibrium"] = to_string(tag);
  j["roots"] = nlohmann::json::array();
  for (const CharRoot& r : roots)
    j["roots"].push_back({{"re", r.lambda.real()},
                          {"im", r.lambda.imag()},
                          {"residual", r.residual}});
  return j;
}

inline void write_roots_csv(std::ostream& os,
                            const std::vector<CharRoot>& roots) {
  os << "re,im,residual\n";
  for (const CharRoot& r : roots)
    os << csv_num(r.lambda.real()) << ',' << csv_num(r.lambda.imag()) << ','
       << csv_num(r.residual) << '\n';
}

inline nlohmann::json heteroclinic_json(double rho,
                                        const HeteroclinicResult& res) {
  return nlohmann::json{{"rho", rho},
                        {"c", res.c},
                        {"lambda0", res.lambda0},
                        {"fitted_growth", res.fitted_growth},
                        {"terminal_gap", res.terminal_gap}};
}

}  // namespace gogrow
