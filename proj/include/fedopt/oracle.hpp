#ifndef FEDOPT_ORACLE_HPP
#define FEDOPT_ORACLE_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fedopt/baselines.hpp"
#include "fedopt/noma_region.hpp"
#include "fedopt/solver_noma.hpp"
#include "fedopt/solver_tdma.hpp"

namespace fedopt {

inline constexpr int kMaxOracleDevices = 3;
inline constexpr int kMaxOracleResolution = 400;

namespace detail_oracle {

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  if (n == 1) { g[0] = hi; return g; }
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(llo + (lhi - llo) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

inline bool advance(std::vector<int>& idx, int base) {
  for (int d = static_cast<int>(idx.size()) - 1; d >= 0; --d) {
    if (++idx[d] < base) return true;
    idx[d] = 0;
  }
  return false;
}

}  // namespace detail_oracle

/// Exhaustive log-grid search over the transmit powers and the upload window.
/// The delay constraint is taken tight, which pins the local window and hence
/// the frequencies; this is lossless at an optimum of the convex problem.
inline NomaSolution grid_solve_noma(const SystemConfig& cfg, int resolution) {
  cfg.validate();
  const int K = cfg.num_devices();
  if (K > kMaxOracleDevices) throw std::invalid_argument("grid oracle: too many devices");
  if (resolution < 2 || resolution > kMaxOracleResolution)
    throw std::invalid_argument("grid oracle: bad resolution");

  const int N = cfg.plan.local_iters;
  const double M = cfg.plan.global_iters;
  const double S = cfg.plan.upload_bits;
  const double B = cfg.channel.bandwidth, sigma2 = cfg.channel.noise_power;
  const double budget = round_budget(cfg);
  NomaSolution best;

  double t_loc_min = 0.0;
  for (const auto& d : cfg.devices)
    t_loc_min = std::max(t_loc_min, d.cycles_per_update() / d.max_cpu_freq);
  double t_lo = S / max_common_rate(cfg);
  double t_hi = budget - N * t_loc_min;
  if (t_hi < t_lo * (1 - 1e-12)) return best;
  t_hi = std::max(t_hi, t_lo * (1 + 1e-15));

  auto t_grid = detail_oracle::log_grid(t_lo, t_hi, resolution);
  auto p_grid = detail_oracle::log_grid(1e-6 * cfg.max_power, cfg.max_power, resolution);

  double best_energy = std::numeric_limits<double>::infinity();
  std::vector<double> best_p(K), ph(K);
  double best_t = 0.0, best_comp = 0.0;
  std::vector<double> best_f;

  for (double t : t_grid) {
    double t_loc = (budget - t) / N;
    auto f = detail_baseline::freqs_for_window(cfg, t_loc);
    if (f.empty()) continue;
    double comp = computation_energy(cfg, f);
    double need = S / t;  // equal per-device rate target

    std::vector<int> idx(K, 0);
    do {
      double psum = 0.0;
      for (int k = 0; k < K; ++k) {
        double p = p_grid[idx[k]];
        ph[k] = p * cfg.channel_gains[k];
        psum += p;
      }
      double energy = comp + M * psum * t;
      if (energy >= best_energy) continue;
      bool ok = true;
      for (unsigned mask = 1; mask < (1u << K) && ok; ++mask) {
        double g = 0.0;
        int cnt = 0;
        for (int k = 0; k < K; ++k)
          if (mask & (1u << k)) { g += ph[k]; ++cnt; }
        if (cnt * need > B * std::log2(1.0 + g / sigma2) * (1 + 1e-12)) ok = false;
      }
      if (!ok) continue;
      best_energy = energy;
      best_t = t;
      best_comp = comp;
      best_f = f;
      for (int k = 0; k < K; ++k) best_p[k] = p_grid[idx[k]];
    } while (detail_oracle::advance(idx, resolution));
  }

  if (!std::isfinite(best_energy)) return best;
  detail_noma::Primal pr;
  pr.f = best_f;
  pr.e.resize(K);
  for (int k = 0; k < K; ++k) pr.e[k] = best_p[k] * best_t;
  pr.s.assign(K, S);
  pr.t_up = best_t;
  pr.t_loc = (budget - best_t) / N;
  DecodingOrder o = DecodingOrder::identity(K);
  std::sort(o.perm.begin(), o.perm.end(), [&](int a, int b) {
    return cfg.channel_gains[a] < cfg.channel_gains[b];
  });
  pr.decoding.emplace_back(o, 1.0);
  pr.energy = best_energy;
  pr.feasible = true;
  (void)best_comp;
  return detail_baseline::finish_noma(cfg, pr);
}

/// Exhaustive log-grid search over the per-device slot lengths; frequencies
/// follow from the leftover local window.
inline TdmaSolution grid_solve_tdma(const SystemConfig& cfg, int resolution) {
  cfg.validate();
  const int K = cfg.num_devices();
  if (K > kMaxOracleDevices) throw std::invalid_argument("grid oracle: too many devices");
  if (resolution < 2 || resolution > kMaxOracleResolution)
    throw std::invalid_argument("grid oracle: bad resolution");

  const int N = cfg.plan.local_iters;
  const double M = cfg.plan.global_iters;
  const double budget = round_budget(cfg);
  TdmaSolution best;

  std::vector<std::vector<double>> slot_grid(K), slot_energy(K);
  for (int k = 0; k < K; ++k) {
    double cap = min_slot_time(cfg.plan.upload_bits, cfg.channel_gains[k], cfg.max_power,
                               cfg.channel.noise_power, cfg.channel.bandwidth);
    if (cap >= budget) return best;
    slot_grid[k] = detail_oracle::log_grid(cap, budget, resolution);
    slot_energy[k].resize(resolution);
    for (int i = 0; i < resolution; ++i)
      slot_energy[k][i] =
          upload_energy_given_time(cfg.plan.upload_bits, slot_grid[k][i],
                                   cfg.channel_gains[k], cfg.channel.noise_power,
                                   cfg.channel.bandwidth);
  }

  double best_energy = std::numeric_limits<double>::infinity();
  std::vector<int> best_idx;
  std::vector<double> best_f;
  std::vector<int> idx(K, 0);
  do {
    double used = 0.0, comm = 0.0;
    for (int k = 0; k < K; ++k) {
      used += slot_grid[k][idx[k]];
      comm += slot_energy[k][idx[k]];
    }
    double t_loc = (budget - used) / N;
    if (!(t_loc > 0)) continue;
    auto f = detail_baseline::freqs_for_window(cfg, t_loc);
    if (f.empty()) continue;
    double energy = computation_energy(cfg, f) + M * comm;
    if (energy < best_energy) {
      best_energy = energy;
      best_idx = idx;
      best_f = f;
    }
  } while (detail_oracle::advance(idx, resolution));

  if (!std::isfinite(best_energy)) return best;
  std::vector<double> slots(K);
  for (int k = 0; k < K; ++k) slots[k] = slot_grid[k][best_idx[k]];
  return detail_baseline::finish_tdma(cfg, best_f, slots);
}

inline std::variant<NomaSolution, TdmaSolution> grid_solve(const SystemConfig& cfg,
                                                           Protocol protocol, int resolution) {
  if (protocol == Protocol::Noma) return grid_solve_noma(cfg, resolution);
  return grid_solve_tdma(cfg, resolution);
}

// ---------------------------------------------------------------------------
// Solution audits
// ---------------------------------------------------------------------------

struct AuditOptions {
  double constraint_tol = 1e-6;
  double slackness_tol = 1e-5;
  double stationarity_tol = 1e-4;
};

struct AuditReport {
  double max_constraint_violation = 0.0;  // relative
  std::vector<double> complementary_slackness_residuals;
  double stationarity_residual = 0.0;
  bool slackness_applicable = false;
  double objective = 0.0;
  bool pass = false;
};

namespace detail_oracle {

inline void track(double& worst, double lhs, double rhs, double scale) {
  worst = std::max(worst, (lhs - rhs) / std::max(1.0, std::abs(scale)));
}

}  // namespace detail_oracle

inline AuditReport audit_solution(const NomaSolution& sol, const SystemConfig& cfg,
                                  const AuditOptions& opt = {}) {
  using detail_oracle::track;
  AuditReport rep;
  if (sol.status == SolveStatus::Infeasible) return rep;
  const int K = cfg.num_devices();
  const int M = cfg.plan.global_iters, N = cfg.plan.local_iters;
  const double S = cfg.plan.upload_bits, T = cfg.plan.max_delay;
  const double B = cfg.channel.bandwidth, sigma2 = cfg.channel.noise_power;

  double& v = rep.max_constraint_violation;
  double t_loc_needed = 0.0;
  double comp = 0.0, comm = 0.0;
  for (int k = 0; k < K; ++k) {
    const auto& d = cfg.devices[k];
    track(v, sol.cpu_freqs[k], d.max_cpu_freq, d.max_cpu_freq);
    track(v, -sol.cpu_freqs[k], 0.0, d.max_cpu_freq);
    track(v, sol.energies[k], cfg.max_power * sol.t_up, cfg.max_power * sol.t_up);
    track(v, -sol.energies[k], 0.0, cfg.max_power * sol.t_up);
    track(v, d.cycles_per_update() / sol.cpu_freqs[k], sol.t_loc, sol.t_loc);
    track(v, S, sol.bits[k], S);
    t_loc_needed = std::max(t_loc_needed, d.cycles_per_update() / sol.cpu_freqs[k]);
    comp += double(M) * N * d.cycles_per_update() * d.capacitance_coeff *
            sol.cpu_freqs[k] * sol.cpu_freqs[k];
    comm += double(M) * sol.energies[k];
  }
  double delay = double(M) * (double(N) * sol.t_loc + sol.t_up);
  track(v, delay, T, T);

  // all 2^K - 1 capacity-region inequalities on the reported bit vector
  BitAllocation alloc{sol.bits, sol.energies, sol.t_up};
  if (K <= kMaxExhaustiveDevices &&
      !bit_region_contains(alloc, cfg.channel_gains, sigma2, B,
                           opt.constraint_tol * S)) {
    double worst = 0.0;
    for (unsigned mask = 1; mask < (1u << K); ++mask) {
      double bits = 0.0, recv = 0.0;
      for (int k = 0; k < K; ++k)
        if (mask & (1u << k)) {
          bits += sol.bits[k];
          recv += sol.energies[k] * cfg.channel_gains[k];
        }
      double cap = sol.t_up * B * std::log2(1.0 + recv / (sol.t_up * sigma2));
      worst = std::max(worst, (bits - cap) / std::max(1.0, cap));
    }
    v = std::max(v, worst);
  }

  track(v, std::abs(sol.energy_total - (comp + comm)), 0.0, sol.energy_total);
  rep.objective = comp + comm;

  rep.slackness_applicable = sol.dual.lambda.size() == K;
  if (rep.slackness_applicable) {
    double esc = std::max(1.0, rep.objective);
    auto& res = rep.complementary_slackness_residuals;
    for (int k = 0; k < K; ++k)
      res.push_back(std::abs(sol.dual.lambda[k] * (S - sol.bits[k])) / esc);
    for (int k = 0; k < K; ++k)
      res.push_back(std::abs(sol.dual.mu[k] *
                             (sol.t_loc - cfg.devices[k].cycles_per_update() /
                                              sol.cpu_freqs[k])) / esc);
    res.push_back(std::abs(sol.dual.nu * (T - delay)) / esc);

    // no received energy should be wasted: the full-set inequality is tight
    double recv = 0.0, bits = 0.0;
    for (int k = 0; k < K; ++k) {
      recv += sol.energies[k] * cfg.channel_gains[k];
      bits += sol.bits[k];
    }
    double cap = sol.t_up * B * std::log2(1.0 + recv / (sol.t_up * sigma2));
    res.push_back(std::abs(cap - bits) / std::max(1.0, bits));

    // frequency stationarity against the closed form
    for (int k = 0; k < K; ++k) {
      double fstar = optimal_cpu_frequency(sol.dual.mu[k], cfg.devices[k], M, N);
      rep.stationarity_residual = std::max(
          rep.stationarity_residual, std::abs(sol.cpu_freqs[k] - fstar) / fstar);
    }
  }

  bool slack_ok = true;
  for (double r : rep.complementary_slackness_residuals)
    slack_ok = slack_ok && r <= opt.slackness_tol;
  rep.pass = v <= opt.constraint_tol && slack_ok &&
             rep.stationarity_residual <= opt.stationarity_tol;
  return rep;
}

inline AuditReport audit_solution(const TdmaSolution& sol, const SystemConfig& cfg,
                                  const AuditOptions& opt = {}) {
  using detail_oracle::track;
  AuditReport rep;
  if (sol.status == SolveStatus::Infeasible) return rep;
  const int K = cfg.num_devices();
  const int M = cfg.plan.global_iters, N = cfg.plan.local_iters;
  const double T = cfg.plan.max_delay;

  double& v = rep.max_constraint_violation;
  double comp = 0.0, comm = 0.0, used = 0.0;
  for (int k = 0; k < K; ++k) {
    const auto& d = cfg.devices[k];
    double cap = min_slot_time(cfg.plan.upload_bits, cfg.channel_gains[k], cfg.max_power,
                               cfg.channel.noise_power, cfg.channel.bandwidth);
    track(v, sol.cpu_freqs[k], d.max_cpu_freq, d.max_cpu_freq);
    track(v, cap, sol.slot_times[k], cap);  // power cap <=> slot >= cap time
    track(v, d.cycles_per_update() / sol.cpu_freqs[k], sol.t_loc, sol.t_loc);
    comp += double(M) * N * d.cycles_per_update() * d.capacitance_coeff *
            sol.cpu_freqs[k] * sol.cpu_freqs[k];
    comm += double(M) * upload_energy_given_time(cfg.plan.upload_bits, sol.slot_times[k],
                                                 cfg.channel_gains[k],
                                                 cfg.channel.noise_power,
                                                 cfg.channel.bandwidth);
    used += sol.slot_times[k];
  }
  double delay = double(M) * (double(N) * sol.t_loc + used);
  track(v, delay, T, T);
  track(v, std::abs(sol.energy_total - (comp + comm)), 0.0, sol.energy_total);
  rep.objective = comp + comm;

  rep.slackness_applicable = sol.dual.omega.size() == K;
  if (rep.slackness_applicable) {
    double esc = std::max(1.0, rep.objective);
    auto& res = rep.complementary_slackness_residuals;
    for (int k = 0; k < K; ++k)
      res.push_back(std::abs(sol.dual.omega[k] *
                             (sol.t_loc - cfg.devices[k].cycles_per_update() /
                                              sol.cpu_freqs[k])) / esc);
    res.push_back(std::abs(sol.dual.zeta * (T - delay)) / esc);

    for (int k = 0; k < K; ++k) {
      double fstar = optimal_cpu_frequency(sol.dual.omega[k], cfg.devices[k], M, N);
      rep.stationarity_residual = std::max(
          rep.stationarity_residual, std::abs(sol.cpu_freqs[k] - fstar) / fstar);
      // slot stationarity: marginal upload energy balances the delay price,
      // unless pinned at the power cap
      double cap = min_slot_time(cfg.plan.upload_bits, cfg.channel_gains[k], cfg.max_power,
                                 cfg.channel.noise_power, cfg.channel.bandwidth);
      double t = sol.slot_times[k];
      if (t > cap * (1 + 1e-6)) {
        double dt = 1e-6 * t;
        double de = (upload_energy_given_time(cfg.plan.upload_bits, t + dt,
                                              cfg.channel_gains[k], cfg.channel.noise_power,
                                              cfg.channel.bandwidth) -
                     upload_energy_given_time(cfg.plan.upload_bits, t - dt,
                                              cfg.channel_gains[k], cfg.channel.noise_power,
                                              cfg.channel.bandwidth)) /
                    (2 * dt);
        rep.stationarity_residual =
            std::max(rep.stationarity_residual,
                     std::abs(de + sol.dual.zeta) / std::max(1e-300, sol.dual.zeta));
      }
    }
  }

  bool slack_ok = true;
  for (double r : rep.complementary_slackness_residuals)
    slack_ok = slack_ok && r <= opt.slackness_tol;
  rep.pass = v <= opt.constraint_tol && slack_ok &&
             rep.stationarity_residual <= opt.stationarity_tol;
  return rep;
}

}  // namespace fedopt

#endif  // FEDOPT_ORACLE_HPP
