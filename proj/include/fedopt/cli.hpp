#ifndef FEDOPT_CLI_HPP
#define FEDOPT_CLI_HPP

#include <chrono>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedopt/baselines.hpp"
#include "fedopt/fedsim.hpp"
#include "fedopt/oracle.hpp"
#include "fedopt/report.hpp"
#include "fedopt/scenario.hpp"

namespace fedopt {

namespace detail_cli {

inline std::string file_stem(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string base = (slash == std::string::npos) ? path : path.substr(slash + 1);
  auto dot = base.find_last_of('.');
  return (dot == std::string::npos) ? base : base.substr(0, dot);
}

inline bool parse_protocol(const std::string& s, Protocol* out) {
  if (s == "noma") { *out = Protocol::Noma; return true; }
  if (s == "tdma") { *out = Protocol::Tdma; return true; }
  return false;
}

inline bool parse_scheme(const std::string& s, SchemeId* out) {
  if (s == "joint") { *out = SchemeId::Joint; return true; }
  if (s == "comm_only") { *out = SchemeId::CommOnly; return true; }
  if (s == "comp_only") { *out = SchemeId::CompOnly; return true; }
  if (s == "delay_min") { *out = SchemeId::DelayMin; return true; }
  return false;
}

/// Applies one sweep parameter. `distance` moves the fleet's mean range while
/// preserving each device's offset from it; `MN` trades global for local
/// iterations at a fixed M*N product.
inline bool apply_sweep(SystemConfig& cfg, const std::string& param, double value,
                        std::string* err) {
  if (param == "T") {
    cfg.plan.max_delay = value;
  } else if (param == "pmax") {
    cfg.max_power = value;
  } else if (param == "fmax") {
    for (auto& d : cfg.devices) d.max_cpu_freq = value;
  } else if (param == "cycles") {
    for (auto& d : cfg.devices) d.flops_per_update = value * d.flops_per_cycle;
  } else if (param == "distance") {
    double mean = 0.0;
    for (const auto& d : cfg.devices) mean += d.distance;
    mean /= cfg.devices.size();
    for (auto& d : cfg.devices) {
      d.distance = value + (d.distance - mean);
      if (!(d.distance > 0)) {
        *err = "sweep: distance shift produces a non-positive range";
        return false;
      }
    }
    cfg.recompute_gains();
  } else if (param == "MN") {
    long product = long(cfg.plan.global_iters) * cfg.plan.local_iters;
    int m = std::max(1, int(std::lround(value)));
    cfg.plan.global_iters = m;
    cfg.plan.local_iters = std::max(1, int(std::lround(double(product) / m)));
  } else {
    *err = "sweep: unknown parameter '" + param + "'";
    return false;
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    *err = std::string("sweep: ") + e.what();
    return false;
  }
  return true;
}

struct RowOutcome {
  ResultRow row;
  SolveStatus status = SolveStatus::Infeasible;
};

inline RowOutcome run_one(const SystemConfig& cfg, const std::string& id, Protocol proto,
                          SchemeId scheme, bool timed) {
  RowOutcome out;
  auto t0 = std::chrono::steady_clock::now();
  if (proto == Protocol::Noma) {
    NomaSolution sol = solve_baseline_noma(cfg, scheme);
    out.row = make_result_row(cfg, id, scheme, sol);
    out.status = sol.status;
  } else {
    TdmaSolution sol = solve_baseline_tdma(cfg, scheme);
    out.row = make_result_row(cfg, id, scheme, sol);
    out.status = sol.status;
  }
  if (timed)
    out.row.solver_runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline int with_output(const std::string& path, const std::function<int(std::ostream&)>& fn) {
  if (path.empty()) return fn(std::cout);
  std::ofstream os(path);
  if (!os) {
    std::cerr << "error: cannot open output file " << path << "\n";
    return 2;
  }
  return fn(os);
}

}  // namespace detail_cli

inline int run_command(int argc, const char* const* argv) {
  using namespace detail_cli;
  CLI::App app{"federated edge learning energy optimizer"};
  app.require_subcommand(1);

  std::string scenario_path, protocol_str = "noma", scheme_str = "joint", out_path;
  std::string param, values_str;
  bool timed = false;
  int resolution = 100;
  int sim_devices = 2, sim_samples = 32, sim_M = 50, sim_N = 1, sim_dim = 3;
  double sim_eta = 0.05, sim_noise = 0.1;
  unsigned sim_seed = 42;

  auto* feas = app.add_subcommand("feasibility", "print the minimum achievable delay");
  feas->add_option("scenario", scenario_path)->required();
  feas->add_option("--protocol", protocol_str);

  auto* solve = app.add_subcommand("solve", "solve one scenario and emit a result row");
  solve->add_option("scenario", scenario_path)->required();
  solve->add_option("--protocol", protocol_str);
  solve->add_option("--scheme", scheme_str);
  solve->add_option("--out", out_path);
  solve->add_flag("--timed", timed, "measure wall-clock solver time (non-deterministic column)");

  auto* sweep = app.add_subcommand("sweep", "solve across a parameter range");
  sweep->add_option("scenario", scenario_path)->required();
  sweep->add_option("--param", param)->required();
  sweep->add_option("--values", values_str)->required();
  sweep->add_option("--out", out_path);
  sweep->add_flag("--timed", timed);

  auto* oracle_cmd = app.add_subcommand("oracle", "compare the solver against the grid oracle");
  oracle_cmd->add_option("scenario", scenario_path)->required();
  oracle_cmd->add_option("--protocol", protocol_str);
  oracle_cmd->add_option("--resolution", resolution);

  auto* sim = app.add_subcommand("simulate", "run the synthetic federated training loop");
  sim->add_option("--devices", sim_devices);
  sim->add_option("--samples", sim_samples);
  sim->add_option("--eta", sim_eta);
  sim->add_option("--M", sim_M);
  sim->add_option("--N", sim_N);
  sim->add_option("--dim", sim_dim);
  sim->add_option("--noise", sim_noise);
  sim->add_option("--seed", sim_seed);
  sim->add_option("--out", out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      if (sim_eta <= 0 || sim_M < 0 || sim_N < 1) {
        std::cerr << "error: need --eta > 0, --M >= 0, --N >= 1\n";
        return 2;
      }
      Dataset ds = make_synthetic_dataset(sim_devices, sim_samples, sim_dim, sim_noise, sim_seed);
      ModelParams w0{Eigen::VectorXd::Zero(sim_dim)};
      TrainingTrajectory tr = run_training(ds, sim_eta, sim_M, sim_N, w0);
      return with_output(out_path, [&](std::ostream& os) {
        write_trajectory_csv(os, tr);
        return 0;
      });
    }

    Protocol proto;
    if (!parse_protocol(protocol_str, &proto)) {
      std::cerr << "error: unknown protocol '" << protocol_str << "' (use noma or tdma)\n";
      return 2;
    }
    SystemConfig cfg = load_scenario_file(scenario_path);
    std::string id = file_stem(scenario_path);

    if (feas->parsed()) {
      double tmin = proto == Protocol::Noma ? t_min_noma(cfg) : t_min_tdma(cfg);
      bool ok = tmin <= cfg.plan.max_delay * (1 + 1e-12);
      std::cout << "t_min = " << format_number(tmin) << " s\n"
                << (ok ? "feasible" : "infeasible") << "\n";
      return ok ? 0 : 3;
    }

    if (solve->parsed()) {
      SchemeId scheme;
      if (!parse_scheme(scheme_str, &scheme)) {
        std::cerr << "error: unknown scheme '" << scheme_str
                  << "' (use joint, comm_only, comp_only, or delay_min)\n";
        return 2;
      }
      RowOutcome out = run_one(cfg, id, proto, scheme, timed);
      int rc = with_output(out_path, [&](std::ostream& os) {
        write_result_header(os, cfg.num_devices());
        write_result_row(os, out.row, cfg.num_devices());
        return 0;
      });
      if (rc != 0) return rc;
      if (out.status == SolveStatus::Infeasible) return 3;
      if (out.status == SolveStatus::ToleranceNotMet) return 4;
      return 0;
    }

    if (sweep->parsed()) {
      std::vector<double> values;
      std::stringstream ss(values_str);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          values.push_back(std::stod(tok));
        } catch (const std::exception&) {
          std::cerr << "error: bad sweep value '" << tok << "'\n";
          return 2;
        }
      }
      if (values.empty()) {
        std::cerr << "error: --values is empty\n";
        return 2;
      }
      const SchemeId schemes[] = {SchemeId::Joint, SchemeId::CommOnly, SchemeId::CompOnly,
                                  SchemeId::DelayMin};
      const Protocol protocols[] = {Protocol::Noma, Protocol::Tdma};
      std::vector<std::future<RowOutcome>> jobs;
      for (double v : values) {
        SystemConfig swept = cfg;
        std::string err;
        if (!apply_sweep(swept, param, v, &err)) {
          std::cerr << "error: " << err << "\n";
          return 2;
        }
        std::ostringstream label;
        label << id << '[' << param << '=' << format_number(v) << ']';
        for (Protocol p : protocols)
          for (SchemeId s : schemes)
            jobs.push_back(std::async(std::launch::async, run_one, swept, label.str(), p, s,
                                      timed));
      }
      return with_output(out_path, [&](std::ostream& os) {
        write_result_header(os, cfg.num_devices());
        for (auto& j : jobs) write_result_row(os, j.get().row, cfg.num_devices());
        return 0;
      });
    }

    if (oracle_cmd->parsed()) {
      double solver_e, oracle_e;
      SolveStatus st;
      if (proto == Protocol::Noma) {
        NomaSolution sol = solve_p1(cfg);
        NomaSolution ref = grid_solve_noma(cfg, resolution);
        st = sol.status;
        solver_e = sol.energy_total;
        oracle_e = ref.energy_total;
        if (ref.status == SolveStatus::Infeasible) st = SolveStatus::Infeasible;
      } else {
        TdmaSolution sol = solve_p2(cfg);
        TdmaSolution ref = grid_solve_tdma(cfg, resolution);
        st = sol.status;
        solver_e = sol.energy_total;
        oracle_e = ref.energy_total;
        if (ref.status == SolveStatus::Infeasible) st = SolveStatus::Infeasible;
      }
      if (st == SolveStatus::Infeasible) {
        std::cout << "infeasible\n";
        return 3;
      }
      double rel = std::abs(solver_e - oracle_e) / oracle_e;
      std::cout << "protocol,solver_energy,oracle_energy,rel_diff\n"
                << to_string(proto) << ',' << format_number(solver_e) << ','
                << format_number(oracle_e) << ',' << format_number(rel) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace fedopt

#endif  // FEDOPT_CLI_HPP
