#ifndef FEDOPT_SOLVER_TDMA_HPP
#define FEDOPT_SOLVER_TDMA_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "fedopt/numerics.hpp"
#include "fedopt/scenario.hpp"
#include "fedopt/solver_common.hpp"

namespace fedopt {

struct TdmaDualPoint {
  Eigen::VectorXd omega;  // local-time constraints
  double zeta = 0.0;      // delay constraint

  bool feasible(int M, int N, double tol = 0.0) const {
    if (omega.minCoeff() < -tol || zeta < -tol) return false;
    return zeta * M * N - omega.sum() >= -tol * std::max(1.0, zeta * M * N);
  }
};

struct TdmaSolution {
  std::vector<double> cpu_freqs;
  std::vector<double> powers;
  std::vector<double> rates;
  std::vector<double> slot_times;  // per-device upload slots, seconds
  std::vector<double> energies;    // per-device upload energy per round, J
  double t_loc = 0.0;
  double energy_total = 0.0, energy_comm = 0.0, energy_comp = 0.0;
  double dual_value = std::numeric_limits<double>::quiet_NaN();
  double duality_gap_rel = std::numeric_limits<double>::quiet_NaN();
  TdmaDualPoint dual;
  SolveStatus status = SolveStatus::Infeasible;
};

/// Upload energy to deliver `bits` over a dedicated slot of length t.
inline double upload_energy_given_time(double bits, double t, double gain,
                                       double noise, double bandwidth) {
  if (!(t > 0)) return std::numeric_limits<double>::infinity();
  double expo = bits / (bandwidth * t);
  if (expo > 60.0) return std::numeric_limits<double>::infinity();
  return (std::exp2(expo) - 1.0) * t * noise / gain;
}

/// Shortest slot a device can use without exceeding the transmit-power cap.
inline double min_slot_time(double bits, double gain, double max_power, double noise,
                            double bandwidth) {
  return bits / (bandwidth * std::log2(1.0 + max_power * gain / noise));
}

/// Minimum achievable training delay under TDMA.
inline double t_min_tdma(const SystemConfig& cfg) {
  double t_loc = 0.0, slots = 0.0;
  for (int k = 0; k < cfg.num_devices(); ++k) {
    const auto& d = cfg.devices[k];
    t_loc = std::max(t_loc, d.cycles_per_update() / d.max_cpu_freq);
    slots += min_slot_time(cfg.plan.upload_bits, cfg.channel_gains[k], cfg.max_power,
                           cfg.channel.noise_power, cfg.channel.bandwidth);
  }
  return cfg.plan.global_iters * (cfg.plan.local_iters * t_loc + slots);
}

/// Stationary slot length for delay price zeta: the root of
/// d/dt[upload_energy] + zeta = 0, clamped below by the power cap and above
/// by t_ceiling. zeta = 0 pushes the slot to the ceiling.
inline double optimal_upload_time(double zeta, double bits, double gain, double noise,
                                  double bandwidth, double max_power, double t_ceiling) {
  double cap = min_slot_time(bits, gain, max_power, noise, bandwidth);
  if (zeta <= 0.0) return std::max(cap, t_ceiling);
  double over = noise / gain;
  auto g = [&](double t) {
    double expo = bits / (bandwidth * t);
    if (expo > 60.0) return -std::numeric_limits<double>::infinity();
    return std::exp2(expo) * over * (1.0 - expo * std::log(2.0)) - over + zeta;
  };
  if (g(t_ceiling) <= 0.0) return std::max(cap, t_ceiling);
  double lo = std::min(cap, t_ceiling), hi = t_ceiling;
  if (g(lo) >= 0.0) return std::max(cap, lo);
  double root = bisect_root(g, lo, hi, 1e-13);
  return std::max(cap, root);
}

struct TdmaDualEval {
  double value = 0.0;
  Eigen::VectorXd subgradient;  // ascent direction, ordered (omega, zeta)
  std::vector<double> cpu_freqs;
  std::vector<double> slot_times;
  double t_loc = 0.0;
};

inline TdmaDualEval dual_value_tdma(const TdmaDualPoint& pt, const SystemConfig& cfg,
                                    double slot_ceiling = -1.0) {
  const int K = cfg.num_devices();
  const int M = cfg.plan.global_iters, N = cfg.plan.local_iters;
  if (!pt.feasible(M, N, 1e-9))
    throw std::invalid_argument("dual_value_tdma: dual-infeasible point");
  if (slot_ceiling <= 0) slot_ceiling = 1e6 * round_budget(cfg);

  TdmaDualEval ev;
  ev.cpu_freqs.resize(K);
  ev.slot_times.resize(K);
  double value = 0.0;
  for (int k = 0; k < K; ++k) {
    const auto& d = cfg.devices[k];
    double w = std::max(0.0, pt.omega[k]);
    double f = optimal_cpu_frequency(w, d, M, N);
    ev.cpu_freqs[k] = f;
    ev.t_loc = std::max(ev.t_loc, d.cycles_per_update() / f);
    value += double(M) * N * d.cycles_per_update() * d.capacitance_coeff * f * f +
             d.cycles_per_update() * w / f;

    double zeta = std::max(0.0, pt.zeta);
    double t = optimal_upload_time(zeta, cfg.plan.upload_bits, cfg.channel_gains[k],
                                   cfg.channel.noise_power, cfg.channel.bandwidth,
                                   cfg.max_power, slot_ceiling);
    ev.slot_times[k] = t;
    value += double(M) * (upload_energy_given_time(cfg.plan.upload_bits, t,
                                                   cfg.channel_gains[k],
                                                   cfg.channel.noise_power,
                                                   cfg.channel.bandwidth) +
                          zeta * t);
  }
  value -= std::max(0.0, pt.zeta) * cfg.plan.max_delay;
  ev.value = value;

  // The local window was minimized out of the value: its coefficient
  // zeta*M*N - sum(omega) is nonnegative, so the minimizer sits at zero in
  // the cone interior and is free (chosen as the straggler time) only when
  // the cone constraint is tight. The subgradient must use that minimizer.
  double cone_slack = std::max(0.0, pt.zeta) * M * N;
  for (int k = 0; k < K; ++k) cone_slack -= std::max(0.0, pt.omega[k]);
  double t_loc_min = cone_slack > 0 ? 0.0 : ev.t_loc;

  ev.subgradient.resize(K + 1);
  double slot_sum = 0.0;
  for (int k = 0; k < K; ++k) {
    ev.subgradient[k] = cfg.devices[k].cycles_per_update() / ev.cpu_freqs[k] - t_loc_min;
    slot_sum += ev.slot_times[k];
  }
  ev.subgradient[K] =
      double(M) * (double(N) * t_loc_min + slot_sum) - cfg.plan.max_delay;
  return ev;
}

namespace detail_tdma {

/// Splits an upload budget across devices: each slot is the stationary time
/// for a common delay price, clamped by the power cap, with the price found
/// by bisection so the slots exactly fill the budget.
inline bool fill_slots(const SystemConfig& cfg, double budget_up, std::vector<double>* slots) {
  const int K = cfg.num_devices();
  const double S = cfg.plan.upload_bits;
  auto total_at = [&](double zeta, std::vector<double>* out) {
    double sum = 0.0;
    if (out) out->resize(K);
    for (int k = 0; k < K; ++k) {
      double t = optimal_upload_time(zeta, S, cfg.channel_gains[k],
                                     cfg.channel.noise_power, cfg.channel.bandwidth,
                                     cfg.max_power, 1e9 * budget_up + 1.0);
      if (out) (*out)[k] = t;
      sum += t;
    }
    return sum;
  };

  double cap_sum = 0.0;
  for (int k = 0; k < K; ++k)
    cap_sum += min_slot_time(S, cfg.channel_gains[k], cfg.max_power,
                             cfg.channel.noise_power, cfg.channel.bandwidth);
  if (budget_up < cap_sum * (1 - 1e-12)) return false;

  double zeta_lo = 0.0, zeta_hi = 1.0;
  while (total_at(zeta_hi, nullptr) > budget_up && zeta_hi < 1e30) zeta_hi *= 10.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (zeta_lo + zeta_hi);
    if (total_at(mid, nullptr) > budget_up) zeta_lo = mid; else zeta_hi = mid;
    if (zeta_hi - zeta_lo <= 1e-14 * std::max(1.0, zeta_hi)) break;
  }
  total_at(zeta_hi, slots);
  // slots never exceed the budget at zeta_hi; leftover time is spent on the
  // best channel (energy only improves)
  double sum = 0.0;
  for (double t : *slots) sum += t;
  if (sum < budget_up) {
    int best = 0;
    for (int k = 1; k < K; ++k)
      if (cfg.channel_gains[k] > cfg.channel_gains[best]) best = k;
    (*slots)[best] += budget_up - sum;
  }
  return true;
}

inline double tdma_energy(const SystemConfig& cfg, const std::vector<double>& f,
                          const std::vector<double>& slots, double* comm_out) {
  double comm = 0.0;
  for (int k = 0; k < cfg.num_devices(); ++k)
    comm += cfg.plan.global_iters *
            upload_energy_given_time(cfg.plan.upload_bits, slots[k], cfg.channel_gains[k],
                                     cfg.channel.noise_power, cfg.channel.bandwidth);
  if (comm_out) *comm_out = comm;
  return computation_energy(cfg, f) + comm;
}

struct Primal {
  std::vector<double> f, slots;
  double t_loc = 0.0;
  double energy = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

/// Exact 1-D polish: sweep the local-computation window; frequencies and the
/// optimal slot split follow in closed form.
inline Primal polish(const SystemConfig& cfg) {
  const int K = cfg.num_devices();
  const int N = cfg.plan.local_iters;
  const double budget = round_budget(cfg);
  Primal pr;

  double t_loc_min = 0.0, cap_sum = 0.0;
  for (int k = 0; k < K; ++k) {
    t_loc_min = std::max(t_loc_min,
                         cfg.devices[k].cycles_per_update() / cfg.devices[k].max_cpu_freq);
    cap_sum += min_slot_time(cfg.plan.upload_bits, cfg.channel_gains[k], cfg.max_power,
                             cfg.channel.noise_power, cfg.channel.bandwidth);
  }
  double t_loc_max = (budget - cap_sum) / N;
  if (t_loc_max < t_loc_min * (1 - 1e-12)) return pr;
  t_loc_max = std::max(t_loc_max, t_loc_min);

  auto build = [&](double t_loc, Primal* out) {
    std::vector<double> f(K);
    for (int k = 0; k < K; ++k)
      f[k] = std::clamp(cfg.devices[k].cycles_per_update() / t_loc,
                        cpu_freq_floor(cfg.devices[k]), cfg.devices[k].max_cpu_freq);
    std::vector<double> slots;
    if (!fill_slots(cfg, budget - N * t_loc, &slots))
      return std::numeric_limits<double>::infinity();
    double e = tdma_energy(cfg, f, slots, nullptr);
    if (out) {
      out->f = std::move(f);
      out->slots = std::move(slots);
      out->t_loc = t_loc;
      out->energy = e;
      out->feasible = true;
    }
    return e;
  };

  auto [t_best, e_best] = golden_section_min([&](double t) { return build(t, nullptr); },
                                             t_loc_min, t_loc_max, 1e-12, 300);
  (void)e_best;
  build(t_best, &pr);
  return pr;
}

/// Repairs a dual-recovered point: clamp frequencies, then re-split the
/// remaining round time across slots.
inline Primal repair(const SystemConfig& cfg, std::vector<double> f) {
  const int K = cfg.num_devices();
  const int N = cfg.plan.local_iters;
  const double budget = round_budget(cfg);
  Primal pr;
  for (int k = 0; k < K; ++k)
    f[k] = std::clamp(f[k], cpu_freq_floor(cfg.devices[k]), cfg.devices[k].max_cpu_freq);
  double t_loc = 0.0;
  for (int k = 0; k < K; ++k)
    t_loc = std::max(t_loc, cfg.devices[k].cycles_per_update() / f[k]);

  std::vector<double> slots;
  if (!fill_slots(cfg, budget - N * t_loc, &slots)) {
    // local window too long: shorten it and raise the lagging frequencies
    double cap_sum = 0.0;
    for (int k = 0; k < K; ++k)
      cap_sum += min_slot_time(cfg.plan.upload_bits, cfg.channel_gains[k], cfg.max_power,
                               cfg.channel.noise_power, cfg.channel.bandwidth);
    t_loc = (budget - cap_sum) / N;
    if (!(t_loc > 0)) return pr;
    for (int k = 0; k < K; ++k) {
      double need = cfg.devices[k].cycles_per_update() / t_loc;
      if (need > f[k]) f[k] = std::min(need, cfg.devices[k].max_cpu_freq);
    }
    double t_chk = 0.0;
    for (int k = 0; k < K; ++k)
      t_chk = std::max(t_chk, cfg.devices[k].cycles_per_update() / f[k]);
    if (t_chk > t_loc * (1 + 1e-9)) return pr;
    if (!fill_slots(cfg, budget - N * t_loc, &slots)) return pr;
  }
  pr.f = std::move(f);
  pr.slots = std::move(slots);
  pr.t_loc = t_loc;
  pr.energy = tdma_energy(cfg, pr.f, pr.slots, nullptr);
  pr.feasible = true;
  return pr;
}

}  // namespace detail_tdma

struct TdmaSolveOptions {
  double dual_tol = 1e-11;
  int max_iter_scale = 150;
};

/// Full (P2) pipeline: ellipsoid dual ascent over (omega, zeta) and
/// closed-form primal recovery.
inline TdmaSolution solve_p2(const SystemConfig& cfg, const TdmaSolveOptions& opt = {}) {
  cfg.validate();
  const int K = cfg.num_devices();
  const int M = cfg.plan.global_iters, N = cfg.plan.local_iters;
  const double T = cfg.plan.max_delay;
  const int n = K + 1;

  TdmaSolution sol;
  if (t_min_tdma(cfg) > T * (1 + 1e-12)) {
    sol.status = SolveStatus::Infeasible;
    return sol;
  }

  double e_rough = 0.0;
  for (int k = 0; k < K; ++k) {
    const auto& d = cfg.devices[k];
    e_rough += M * (N * d.cycles_per_update() * d.capacitance_coeff * d.max_cpu_freq *
                        d.max_cpu_freq +
                    cfg.max_power * min_slot_time(cfg.plan.upload_bits, cfg.channel_gains[k],
                                                  cfg.max_power, cfg.channel.noise_power,
                                                  cfg.channel.bandwidth));
  }
  double zeta_scale = std::max(1e-300, e_rough / T);
  double omega_scale = std::max(1e-300, zeta_scale * M * N / (2.0 * K));

  auto unpack = [&](const Eigen::VectorXd& z) {
    TdmaDualPoint pt;
    pt.omega = (z.head(K) * omega_scale).cwiseMax(0.0);
    pt.zeta = std::max(0.0, z[K] * zeta_scale);
    return pt;
  };

  auto oracle = [&](const Eigen::VectorXd& z) {
    CutOracleResult cut;
    for (int i = 0; i < n; ++i) {
      if (z[i] < 0) {
        cut.kind = CutKind::Feasibility;
        cut.subgradient = Eigen::VectorXd::Zero(n);
        cut.subgradient[i] = -1.0;
        return cut;
      }
    }
    if (z.head(K).sum() * omega_scale - z[K] * zeta_scale * M * N > 0) {
      cut.kind = CutKind::Feasibility;
      cut.subgradient = Eigen::VectorXd::Zero(n);
      cut.subgradient.head(K).setConstant(omega_scale);
      cut.subgradient[K] = -zeta_scale * M * N;
      return cut;
    }
    TdmaDualEval ev = dual_value_tdma(unpack(z), cfg);
    cut.kind = CutKind::Objective;
    cut.value = ev.value;
    cut.subgradient.resize(n);
    cut.subgradient.head(K) = ev.subgradient.head(K) * omega_scale;
    cut.subgradient[K] = ev.subgradient[K] * zeta_scale;
    return cut;
  };

  Eigen::VectorXd center = Eigen::VectorXd::Ones(n);
  center[K] = 2.0;
  double radius = 1e6 * center.norm();
  int max_iter = std::max(3000, opt.max_iter_scale * n * n);
  EllipsoidResult er = ellipsoid_max(oracle, center, radius, opt.dual_tol, max_iter);

  TdmaDualPoint dual = unpack(er.point);
  TdmaDualEval ev = dual_value_tdma(dual, cfg);
  sol.dual = dual;
  sol.dual_value = er.value;

  detail_tdma::Primal cand = detail_tdma::repair(cfg, ev.cpu_freqs);
  detail_tdma::Primal pol = detail_tdma::polish(cfg);
  const detail_tdma::Primal* best = nullptr;
  for (const auto* c : {&cand, &pol})
    if (c->feasible && (!best || c->energy < best->energy)) best = c;
  if (!best) {
    sol.status = SolveStatus::ToleranceNotMet;
    return sol;
  }

  sol.cpu_freqs = best->f;
  sol.slot_times = best->slots;
  sol.t_loc = best->t_loc;
  sol.powers.resize(K);
  sol.rates.resize(K);
  sol.energies.resize(K);
  for (int k = 0; k < K; ++k) {
    sol.energies[k] = upload_energy_given_time(cfg.plan.upload_bits, best->slots[k],
                                               cfg.channel_gains[k], cfg.channel.noise_power,
                                               cfg.channel.bandwidth);
    sol.powers[k] = sol.energies[k] / best->slots[k];
    sol.rates[k] = cfg.plan.upload_bits / best->slots[k];
  }
  sol.energy_comp = computation_energy(cfg, best->f);
  sol.energy_total = best->energy;
  sol.energy_comm = sol.energy_total - sol.energy_comp;
  sol.duality_gap_rel = (sol.energy_total - sol.dual_value) / std::max(1.0, sol.energy_total);
  sol.status = er.tol_met ? SolveStatus::Optimal : SolveStatus::ToleranceNotMet;
  return sol;
}

}  // namespace fedopt

#endif  // FEDOPT_SOLVER_TDMA_HPP
