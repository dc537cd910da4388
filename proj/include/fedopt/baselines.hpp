#ifndef FEDOPT_BASELINES_HPP
#define FEDOPT_BASELINES_HPP

#include <variant>

#include "fedopt/solver_noma.hpp"
#include "fedopt/solver_tdma.hpp"

namespace fedopt {

enum class Protocol { Noma, Tdma };

inline const char* to_string(Protocol p) { return p == Protocol::Noma ? "noma" : "tdma"; }

enum class SchemeId { Joint, CommOnly, CompOnly, DelayMin };

inline const char* to_string(SchemeId s) {
  switch (s) {
    case SchemeId::Joint: return "joint";
    case SchemeId::CommOnly: return "comm_only";
    case SchemeId::CompOnly: return "comp_only";
    case SchemeId::DelayMin: return "delay_min";
  }
  return "?";
}

namespace detail_baseline {

inline std::vector<double> max_freqs(const SystemConfig& cfg) {
  std::vector<double> f(cfg.num_devices());
  for (int k = 0; k < cfg.num_devices(); ++k) f[k] = cfg.devices[k].max_cpu_freq;
  return f;
}

inline double straggler_time(const SystemConfig& cfg, const std::vector<double>& f) {
  double t = 0.0;
  for (int k = 0; k < cfg.num_devices(); ++k)
    t = std::max(t, cfg.devices[k].cycles_per_update() / f[k]);
  return t;
}

/// Frequencies stretched to fill a local window, or empty if some device
/// cannot keep up.
inline std::vector<double> freqs_for_window(const SystemConfig& cfg, double t_loc) {
  std::vector<double> f(cfg.num_devices());
  for (int k = 0; k < cfg.num_devices(); ++k) {
    const auto& d = cfg.devices[k];
    double need = d.cycles_per_update() / t_loc;
    if (need > d.max_cpu_freq * (1 + 1e-12)) return {};
    f[k] = std::clamp(need, cpu_freq_floor(d), d.max_cpu_freq);
  }
  return f;
}

inline NomaSolution finish_noma(const SystemConfig& cfg, const detail_noma::Primal& pr) {
  NomaSolution sol;
  if (!pr.feasible) return sol;
  const int K = cfg.num_devices();
  sol.cpu_freqs = pr.f;
  sol.energies = pr.e;
  sol.bits = pr.s;
  sol.t_up = pr.t_up;
  sol.t_loc = pr.t_loc;
  sol.decoding = pr.decoding;
  sol.powers.resize(K);
  sol.rates.resize(K);
  for (int k = 0; k < K; ++k) {
    sol.powers[k] = pr.e[k] / pr.t_up;
    sol.rates[k] = pr.s[k] / pr.t_up;
  }
  sol.energy_comp = computation_energy(cfg, pr.f);
  sol.energy_total = pr.energy;
  sol.energy_comm = pr.energy - sol.energy_comp;
  sol.status = SolveStatus::Optimal;
  return sol;
}

inline detail_noma::Primal noma_full_power_point(const SystemConfig& cfg,
                                                 const std::vector<double>& f, double t_up) {
  detail_noma::Primal pr;
  const int K = cfg.num_devices();
  std::vector<double> ecap(K, cfg.max_power * t_up);
  auto ts = detail_noma::time_share_bits(Eigen::VectorXd::Ones(K), ecap, t_up, cfg,
                                         cfg.plan.upload_bits);
  if (*std::min_element(ts.s.begin(), ts.s.end()) < cfg.plan.upload_bits * (1 - 1e-9))
    return pr;
  pr.f = f;
  pr.e = ecap;
  pr.s = ts.s;
  pr.decoding = ts.orders;
  pr.t_up = t_up;
  pr.t_loc = straggler_time(cfg, f);
  pr.energy = detail_noma::primal_energy(cfg, f, ecap);
  pr.feasible = true;
  return pr;
}

inline TdmaSolution finish_tdma(const SystemConfig& cfg, const std::vector<double>& f,
                                const std::vector<double>& slots) {
  TdmaSolution sol;
  const int K = cfg.num_devices();
  sol.cpu_freqs = f;
  sol.slot_times = slots;
  sol.t_loc = straggler_time(cfg, f);
  sol.powers.resize(K);
  sol.rates.resize(K);
  sol.energies.resize(K);
  double comm = 0.0;
  for (int k = 0; k < K; ++k) {
    sol.energies[k] = upload_energy_given_time(cfg.plan.upload_bits, slots[k],
                                               cfg.channel_gains[k], cfg.channel.noise_power,
                                               cfg.channel.bandwidth);
    sol.powers[k] = sol.energies[k] / slots[k];
    sol.rates[k] = cfg.plan.upload_bits / slots[k];
    comm += cfg.plan.global_iters * sol.energies[k];
  }
  sol.energy_comp = computation_energy(cfg, f);
  sol.energy_comm = comm;
  sol.energy_total = sol.energy_comp + comm;
  sol.status = SolveStatus::Optimal;
  return sol;
}

inline std::vector<double> cap_slots(const SystemConfig& cfg) {
  std::vector<double> s(cfg.num_devices());
  for (int k = 0; k < cfg.num_devices(); ++k)
    s[k] = min_slot_time(cfg.plan.upload_bits, cfg.channel_gains[k], cfg.max_power,
                         cfg.channel.noise_power, cfg.channel.bandwidth);
  return s;
}

}  // namespace detail_baseline

inline NomaSolution solve_baseline_noma(const SystemConfig& cfg, SchemeId scheme) {
  using namespace detail_baseline;
  cfg.validate();
  const int N = cfg.plan.local_iters;
  const double budget = round_budget(cfg);
  NomaSolution infeasible;

  switch (scheme) {
    case SchemeId::Joint:
      return solve_p1(cfg);

    case SchemeId::CommOnly: {
      // full frequency; all the remaining round time goes to the upload
      auto f = max_freqs(cfg);
      double t_up = budget - N * straggler_time(cfg, f);
      if (!(t_up > 0)) return infeasible;
      std::vector<double> e;
      double comm = detail_noma::corner_comm_energy(cfg, t_up, &e);
      if (std::isfinite(comm)) {
        detail_noma::Primal pr;
        pr.f = f;
        pr.e = e;
        pr.s.assign(cfg.num_devices(), cfg.plan.upload_bits);
        pr.t_up = t_up;
        pr.t_loc = straggler_time(cfg, f);
        DecodingOrder o = DecodingOrder::identity(cfg.num_devices());
        std::sort(o.perm.begin(), o.perm.end(), [&](int a, int b) {
          if (cfg.channel_gains[a] != cfg.channel_gains[b])
            return cfg.channel_gains[a] < cfg.channel_gains[b];
          return a < b;
        });
        pr.decoding.emplace_back(o, 1.0);
        pr.energy = detail_noma::primal_energy(cfg, f, e);
        pr.feasible = true;
        return finish_noma(cfg, pr);
      }
      return finish_noma(cfg, noma_full_power_point(cfg, f, t_up));
    }

    case SchemeId::CompOnly: {
      double t_up = cfg.plan.upload_bits / max_common_rate(cfg);
      double t_loc = (budget - t_up) / N;
      if (!(t_loc > 0)) return infeasible;
      auto f = freqs_for_window(cfg, t_loc);
      if (f.empty()) return infeasible;
      return finish_noma(cfg, noma_full_power_point(cfg, f, t_up));
    }

    case SchemeId::DelayMin: {
      if (t_min_noma(cfg) > cfg.plan.max_delay * (1 + 1e-12)) return infeasible;
      double t_up = cfg.plan.upload_bits / max_common_rate(cfg);
      return finish_noma(cfg, noma_full_power_point(cfg, max_freqs(cfg), t_up));
    }
  }
  return infeasible;
}

inline TdmaSolution solve_baseline_tdma(const SystemConfig& cfg, SchemeId scheme) {
  using namespace detail_baseline;
  cfg.validate();
  const int N = cfg.plan.local_iters;
  const double budget = round_budget(cfg);
  TdmaSolution infeasible;

  switch (scheme) {
    case SchemeId::Joint:
      return solve_p2(cfg);

    case SchemeId::CommOnly: {
      auto f = max_freqs(cfg);
      double budget_up = budget - N * straggler_time(cfg, f);
      std::vector<double> slots;
      if (!(budget_up > 0) || !detail_tdma::fill_slots(cfg, budget_up, &slots))
        return infeasible;
      return finish_tdma(cfg, f, slots);
    }

    case SchemeId::CompOnly: {
      auto slots = cap_slots(cfg);
      double used = std::accumulate(slots.begin(), slots.end(), 0.0);
      double t_loc = (budget - used) / N;
      if (!(t_loc > 0)) return infeasible;
      auto f = freqs_for_window(cfg, t_loc);
      if (f.empty()) return infeasible;
      return finish_tdma(cfg, f, slots);
    }

    case SchemeId::DelayMin: {
      if (t_min_tdma(cfg) > cfg.plan.max_delay * (1 + 1e-12)) return infeasible;
      return finish_tdma(cfg, max_freqs(cfg), cap_slots(cfg));
    }
  }
  return infeasible;
}

inline std::variant<NomaSolution, TdmaSolution> solve_baseline(const SystemConfig& cfg,
                                                               Protocol protocol,
                                                               SchemeId scheme) {
  if (protocol == Protocol::Noma) return solve_baseline_noma(cfg, scheme);
  return solve_baseline_tdma(cfg, scheme);
}

}  // namespace fedopt

#endif  // FEDOPT_BASELINES_HPP
