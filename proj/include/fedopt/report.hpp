#ifndef FEDOPT_REPORT_HPP
#define FEDOPT_REPORT_HPP

#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "fedopt/baselines.hpp"

namespace fedopt {

struct ResultRow {
  std::string scenario_id;
  std::string protocol;
  std::string scheme;
  double max_delay = 0.0;
  std::string status;
  double energy_total = 0.0, energy_comm = 0.0, energy_comp = 0.0;
  double t_up = 0.0;  // NOMA window, or total slot time under TDMA
  double t_loc = 0.0;
  double duality_gap_rel = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> cpu_freqs, powers, rates;
  double solver_runtime = 0.0;  // 0 unless timing explicitly enabled
  std::string defaults_fingerprint;
};

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_result_header(std::ostream& os, int num_devices) {
  os << "scenario_id,protocol,scheme,T,status,energy_total,energy_comm,energy_comp,"
        "t_up,t_loc,duality_gap_rel";
  for (int k = 0; k < num_devices; ++k) os << ",f_" << k;
  for (int k = 0; k < num_devices; ++k) os << ",p_" << k;
  for (int k = 0; k < num_devices; ++k) os << ",r_" << k;
  os << ",solver_runtime,defaults_fingerprint\n";
}

inline void write_result_row(std::ostream& os, const ResultRow& row, int num_devices) {
  os << row.scenario_id << ',' << row.protocol << ',' << row.scheme << ','
     << format_number(row.max_delay) << ',' << row.status << ','
     << format_number(row.energy_total) << ',' << format_number(row.energy_comm) << ','
     << format_number(row.energy_comp) << ',' << format_number(row.t_up) << ','
     << format_number(row.t_loc) << ',' << format_number(row.duality_gap_rel);
  auto dump = [&](const std::vector<double>& v) {
    for (int k = 0; k < num_devices; ++k)
      os << ',' << format_number(k < static_cast<int>(v.size()) ? v[k] : 0.0);
  };
  dump(row.cpu_freqs);
  dump(row.powers);
  dump(row.rates);
  os << ',' << format_number(row.solver_runtime) << ',' << row.defaults_fingerprint << "\n";
}

inline ResultRow make_result_row(const SystemConfig& cfg, const std::string& scenario_id,
                                 SchemeId scheme, const NomaSolution& sol) {
  ResultRow r;
  r.scenario_id = scenario_id;
  r.protocol = "noma";
  r.scheme = to_string(scheme);
  r.max_delay = cfg.plan.max_delay;
  r.status = to_string(sol.status);
  r.defaults_fingerprint = cfg.defaults_fingerprint;
  if (sol.status == SolveStatus::Infeasible) {
    double nan = std::numeric_limits<double>::quiet_NaN();
    r.energy_total = r.energy_comm = r.energy_comp = r.t_up = r.t_loc = nan;
    return r;
  }
  r.energy_total = sol.energy_total;
  r.energy_comm = sol.energy_comm;
  r.energy_comp = sol.energy_comp;
  r.t_up = sol.t_up;
  r.t_loc = sol.t_loc;
  r.duality_gap_rel = sol.duality_gap_rel;
  r.cpu_freqs = sol.cpu_freqs;
  r.powers = sol.powers;
  r.rates = sol.rates;
  return r;
}

inline ResultRow make_result_row(const SystemConfig& cfg, const std::string& scenario_id,
                                 SchemeId scheme, const TdmaSolution& sol) {
  ResultRow r;
  r.scenario_id = scenario_id;
  r.protocol = "tdma";
  r.scheme = to_string(scheme);
  r.max_delay = cfg.plan.max_delay;
  r.status = to_string(sol.status);
  r.defaults_fingerprint = cfg.defaults_fingerprint;
  if (sol.status == SolveStatus::Infeasible) {
    double nan = std::numeric_limits<double>::quiet_NaN();
    r.energy_total = r.energy_comm = r.energy_comp = r.t_up = r.t_loc = nan;
    return r;
  }
  r.energy_total = sol.energy_total;
  r.energy_comm = sol.energy_comm;
  r.energy_comp = sol.energy_comp;
  r.t_up = std::accumulate(sol.slot_times.begin(), sol.slot_times.end(), 0.0);
  r.t_loc = sol.t_loc;
  r.duality_gap_rel = sol.duality_gap_rel;
  r.cpu_freqs = sol.cpu_freqs;
  r.powers = sol.powers;
  r.rates = sol.rates;
  return r;
}

}  // namespace fedopt

#endif  // FEDOPT_REPORT_HPP
