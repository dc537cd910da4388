#ifndef FEDOPT_SOLVER_NOMA_HPP
#define FEDOPT_SOLVER_NOMA_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "fedopt/noma_region.hpp"
#include "fedopt/numerics.hpp"
#include "fedopt/scenario.hpp"
#include "fedopt/solver_common.hpp"

namespace fedopt {

inline constexpr double kUploadTimeFloor = 1e-12;  // seconds
inline constexpr double kLambdaTieRel = 1e-7;

struct NomaDualPoint {
  Eigen::VectorXd lambda;  // bit constraints s_k >= S
  Eigen::VectorXd mu;      // local-time constraints
  double nu = 0.0;         // delay constraint

  bool feasible(int M, int N, double tol = 0.0) const {
    if (lambda.minCoeff() < -tol || mu.minCoeff() < -tol || nu < -tol) return false;
    return nu * M * N - mu.sum() >= -tol * std::max(1.0, nu * M * N);
  }
};

struct NomaSolution {
  std::vector<double> cpu_freqs;  // f_k, Hz
  std::vector<double> powers;     // p_k, W
  std::vector<double> rates;      // r_k, bits/s
  std::vector<double> bits;       // s_k
  std::vector<double> energies;   // e_k = p_k * t_up, J
  double t_loc = 0.0;
  double t_up = 0.0;
  std::vector<std::pair<DecodingOrder, double>> decoding;  // (order, time fraction)
  double energy_total = 0.0, energy_comm = 0.0, energy_comp = 0.0;
  double dual_value = std::numeric_limits<double>::quiet_NaN();
  double duality_gap_rel = std::numeric_limits<double>::quiet_NaN();
  NomaDualPoint dual;  // certificate (empty for baselines)
  SolveStatus status = SolveStatus::Infeasible;
};

/// Minimum achievable training delay under NOMA: full frequency for the
/// straggler plus the max-min common-rate upload window, per round.
inline double t_min_noma(const SystemConfig& cfg) {
  double t_loc = 0.0;
  for (const auto& d : cfg.devices)
    t_loc = std::max(t_loc, d.cycles_per_update() / d.max_cpu_freq);
  double rate = max_common_rate(cfg);
  return cfg.plan.global_iters *
         (cfg.plan.local_iters * t_loc + cfg.plan.upload_bits / rate);
}

struct InnerEnergyTime {
  std::vector<double> energies;  // e_k
  double t_up = 0.0;
  double objective = 0.0;  // max value of the (e, t_up) subproblem
};

namespace detail_noma {

struct SortedWeights {
  DecodingOrder order;          // descending lambda, ties by ascending index
  std::vector<double> deltas;   // c_k = lambda_{pi(k)} - lambda_{pi(k+1)} >= 0
};

inline SortedWeights sort_weights(const Eigen::VectorXd& lambda) {
  const int K = static_cast<int>(lambda.size());
  SortedWeights sw;
  sw.order = DecodingOrder::identity(K);
  std::stable_sort(sw.order.perm.begin(), sw.order.perm.end(),
                   [&](int a, int b) { return lambda[a] > lambda[b]; });
  sw.deltas.resize(K);
  for (int k = 0; k < K; ++k) {
    double next = (k + 1 < K) ? lambda[sw.order.perm[k + 1]] : 0.0;
    sw.deltas[k] = std::max(0.0, lambda[sw.order.perm[k]] - next);
  }
  return sw;
}

}  // namespace detail_noma

/// Solves the communication subproblem of the dual: maximize the weighted
/// corner-bit sum minus energy and delay prices over (e, t_up). In powers
/// q = e/t the objective is linear in t, so it reduces to one box-constrained
/// concave solve over q with t at whichever window endpoint the sign of the
/// per-second value picks.
inline InnerEnergyTime inner_energy_time(const Eigen::VectorXd& lambda, double nu,
                                         const SystemConfig& cfg,
                                         double t_floor = kUploadTimeFloor,
                                         double t_ceiling = -1.0,
                                         std::vector<double>* warm_powers = nullptr) {
  if (lambda.minCoeff() < 0 || nu < 0)
    throw std::invalid_argument("inner_energy_time: lambda >= 0 and nu >= 0 required");
  if (t_ceiling <= 0) t_ceiling = round_budget(cfg);
  const int K = cfg.num_devices();
  const double B = cfg.channel.bandwidth;
  const double sigma2 = cfg.channel.noise_power;
  const double M = cfg.plan.global_iters;
  const double ln2 = std::log(2.0);
  const auto& h = cfg.channel_gains;
  auto sw = detail_noma::sort_weights(lambda);
  const auto& perm = sw.order.perm;

  // per-second value, negated: M*sum(q) + nu*M - sum_k c_k*B*log2(1+X_k/sigma2)
  auto objective = [&](const Eigen::VectorXd& q) {
    double prefix = 0.0, val = M * q.sum() + nu * M;
    for (int k = 0; k < K; ++k) {
      prefix += q[perm[k]] * h[perm[k]];
      if (sw.deltas[k] > 0)
        val -= sw.deltas[k] * B * std::log2(1.0 + prefix / sigma2);
    }
    return val;
  };
  auto gradient = [&](const Eigen::VectorXd& q) {
    Eigen::VectorXd g(K);
    std::vector<double> denom(K);
    double prefix = 0.0;
    for (int k = 0; k < K; ++k) {
      prefix += q[perm[k]] * h[perm[k]];
      denom[k] = sigma2 + prefix;
    }
    double suffix = 0.0;
    for (int k = K - 1; k >= 0; --k) {
      suffix += sw.deltas[k] * B / (ln2 * denom[k]);
      g[perm[k]] = M - h[perm[k]] * suffix;
    }
    return g;
  };

  Eigen::VectorXd lower = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(K, cfg.max_power);
  Eigen::VectorXd warm(K);
  bool have_warm = warm_powers && static_cast<int>(warm_powers->size()) == K;
  if (have_warm)
    for (int k = 0; k < K; ++k) warm[k] = std::clamp((*warm_powers)[k], 0.0, upper[k]);
  Eigen::VectorXd q = minimize_convex_box(objective, gradient, lower, upper,
                                          1e-10 * M * std::sqrt(double(K)), 2000,
                                          have_warm ? &warm : nullptr);
  if (warm_powers) warm_powers->assign(q.data(), q.data() + K);

  double per_second = -objective(q);
  InnerEnergyTime res;
  res.t_up = per_second > 0 ? t_ceiling : t_floor;
  res.objective = per_second * res.t_up;
  res.energies.resize(K);
  for (int k = 0; k < K; ++k) res.energies[k] = q[k] * res.t_up;
  return res;
}

struct NomaDualEval {
  double value = 0.0;
  Eigen::VectorXd subgradient;     // ascent direction, ordered (lambda, mu, nu)
  std::vector<double> cpu_freqs;   // minimizing frequencies
  std::vector<double> energies;    // minimizing e
  std::vector<double> bits;        // corner bits at the minimizer
  double t_up = 0.0;
  double t_loc = 0.0;  // recorded straggler time (for the subgradient)
};

/// Evaluates the dual function at a dual-feasible point by solving the K
/// frequency subproblems in closed form and the (e, t_up) subproblem
/// numerically.
inline NomaDualEval dual_value_noma(const NomaDualPoint& pt, const SystemConfig& cfg,
                                    std::vector<double>* warm_powers = nullptr) {
  const int K = cfg.num_devices();
  const int M = cfg.plan.global_iters, N = cfg.plan.local_iters;
  if (!pt.feasible(M, N, 1e-9))
    throw std::invalid_argument("dual_value_noma: dual-infeasible point");

  NomaDualEval ev;
  ev.cpu_freqs.resize(K);
  double comp = 0.0;
  for (int k = 0; k < K; ++k) {
    const auto& d = cfg.devices[k];
    double f = optimal_cpu_frequency(std::max(0.0, pt.mu[k]), d, M, N);
    ev.cpu_freqs[k] = f;
    comp += double(M) * N * d.cycles_per_update() * d.capacitance_coeff * f * f +
            d.cycles_per_update() * std::max(0.0, pt.mu[k]) / f;
    ev.t_loc = std::max(ev.t_loc, d.cycles_per_update() / f);
  }

  Eigen::VectorXd lam = pt.lambda.cwiseMax(0.0);
  InnerEnergyTime inner =
      inner_energy_time(lam, std::max(0.0, pt.nu), cfg, kUploadTimeFloor, -1.0, warm_powers);
  ev.energies = inner.energies;
  ev.t_up = inner.t_up;
  auto [bits, order] = weighted_corner_bits(
      std::vector<double>(lam.data(), lam.data() + K), inner.energies, inner.t_up,
      cfg.channel_gains, cfg.channel.noise_power, cfg.channel.bandwidth);
  ev.bits = bits;

  const double S = cfg.plan.upload_bits, T = cfg.plan.max_delay;
  ev.value = comp + lam.sum() * S - inner.objective - std::max(0.0, pt.nu) * T;

  // Same envelope argument as the slot-based dual: the local window was
  // minimized out, so its minimizer is zero while nu*M*N - sum(mu) is
  // strictly positive and only equals the straggler time on the cone
  // boundary. The subgradient has to be taken at that minimizer.
  double cone_slack = std::max(0.0, pt.nu) * M * N;
  for (int k = 0; k < K; ++k) cone_slack -= std::max(0.0, pt.mu[k]);
  double t_loc_min = cone_slack > 0 ? 0.0 : ev.t_loc;

  ev.subgradient.resize(2 * K + 1);
  for (int k = 0; k < K; ++k) ev.subgradient[k] = S - bits[k];
  for (int k = 0; k < K; ++k)
    ev.subgradient[K + k] = cfg.devices[k].cycles_per_update() / ev.cpu_freqs[k] - t_loc_min;
  ev.subgradient[2 * K] = double(M) * (double(N) * t_loc_min + ev.t_up) - T;
  return ev;
}

// ---------------------------------------------------------------------------
// Primal construction
// ---------------------------------------------------------------------------

namespace detail_noma {

struct Primal {
  std::vector<double> f, e, s;
  double t_up = 0.0, t_loc = 0.0;
  std::vector<std::pair<DecodingOrder, double>> decoding;
  double energy = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

struct TimeShared {
  std::vector<double> s;
  std::vector<std::pair<DecodingOrder, double>> orders;
};

/// Convex-combination of SIC corners across near-tied weight permutations.
/// Weights are found by a penalized least-squares fit that drives every
/// component up to the bit target.
inline TimeShared time_share_bits(const Eigen::VectorXd& lambda, const std::vector<double>& e,
                                  double t_up, const SystemConfig& cfg, double target_bits) {
  const int K = cfg.num_devices();
  auto lam_vec = std::vector<double>(lambda.data(), lambda.data() + K);
  double lam_max = *std::max_element(lam_vec.begin(), lam_vec.end());
  double tie = kLambdaTieRel * std::max(lam_max, 0.0);

  // group tied weights along the sorted order
  DecodingOrder base = DecodingOrder::identity(K);
  std::stable_sort(base.perm.begin(), base.perm.end(),
                   [&](int a, int b) { return lam_vec[a] > lam_vec[b]; });
  std::vector<std::pair<int, int>> groups;  // [begin, end) positions
  for (int b = 0; b < K;) {
    int g = b + 1;
    while (g < K && lam_vec[base.perm[b]] - lam_vec[base.perm[g]] <= tie) ++g;
    groups.emplace_back(b, g);
    b = g;
  }

  // enumerate permutations within tied groups (capped)
  std::vector<DecodingOrder> orders;
  orders.push_back(base);
  for (auto [gb, ge] : groups) {
    if (ge - gb < 2) continue;
    std::vector<DecodingOrder> expanded;
    std::vector<int> span(base.perm.begin() + gb, base.perm.begin() + ge);
    std::sort(span.begin(), span.end());
    do {
      for (const auto& o : orders) {
        DecodingOrder nw = o;
        std::copy(span.begin(), span.end(), nw.perm.begin() + gb);
        expanded.push_back(nw);
        if (expanded.size() >= 1000) break;
      }
      if (expanded.size() >= 1000) break;
    } while (std::next_permutation(span.begin(), span.end()));
    orders = std::move(expanded);
  }

  const int P = static_cast<int>(orders.size());
  Eigen::MatrixXd corners(K, P);
  for (int p = 0; p < P; ++p) {
    std::vector<double> bits(K, 0.0);
    double prefix = 0.0;
    for (int k = 0; k < K; ++k) {
      int dev = orders[p].perm[k];
      double next = prefix + e[dev] * cfg.channel_gains[dev];
      bits[dev] = cfg.channel.bandwidth *
                  std::log2((cfg.channel.noise_power + next / t_up) /
                            (cfg.channel.noise_power + prefix / t_up)) * t_up;
      prefix = next;
    }
    for (int k = 0; k < K; ++k) corners(k, p) = bits[k];
  }

  TimeShared ts;
  if (P == 1) {
    ts.s.assign(corners.col(0).data(), corners.col(0).data() + K);
    ts.orders.emplace_back(orders[0], 1.0);
    return ts;
  }

  const double S = target_bits;
  Eigen::MatrixXd A = corners / S;
  Eigen::VectorXd d = Eigen::VectorXd::Ones(K);  // deficit penalty weights
  Eigen::VectorXd w = Eigen::VectorXd::Constant(P, 1.0 / P);
  Eigen::VectorXd lower = Eigen::VectorXd::Zero(P), upper = Eigen::VectorXd::Ones(P);
  for (int round = 0; round < 12; ++round) {
    auto fobj = [&](const Eigen::VectorXd& x) {
      Eigen::VectorXd r = A * x - Eigen::VectorXd::Ones(K);
      double v = 1e-4 * r.squaredNorm() + 10.0 * std::pow(x.sum() - 1.0, 2);
      for (int k = 0; k < K; ++k) v += d[k] * std::pow(std::max(0.0, -r[k]), 2);
      return v;
    };
    auto fgrad = [&](const Eigen::VectorXd& x) {
      Eigen::VectorXd r = A * x - Eigen::VectorXd::Ones(K);
      Eigen::VectorXd coeff = 2e-4 * r;
      for (int k = 0; k < K; ++k) coeff[k] += -2.0 * d[k] * std::max(0.0, -r[k]);
      Eigen::VectorXd g = A.transpose() * coeff;
      g.array() += 20.0 * (x.sum() - 1.0);
      return g;
    };
    w = minimize_convex_box(fobj, fgrad, lower, upper, 1e-12, 3000, &w);
    double wsum = w.sum();
    if (wsum <= 0) { w.setConstant(1.0 / P); wsum = 1.0; }
    Eigen::VectorXd s = corners * w / wsum;
    double worst = s.minCoeff() / S;
    if (worst >= 1.0 - 1e-9) break;
    for (int k = 0; k < K; ++k)
      if (s[k] < S) d[k] *= 10.0;
  }
  double wsum = w.sum();
  Eigen::VectorXd s = corners * w / wsum;
  ts.s.assign(s.data(), s.data() + K);
  for (int p = 0; p < P; ++p)
    if (w[p] / wsum > 1e-12) ts.orders.emplace_back(orders[p], w[p] / wsum);
  return ts;
}

inline double primal_energy(const SystemConfig& cfg, const std::vector<double>& f,
                            const std::vector<double>& e) {
  double total = computation_energy(cfg, f);
  for (double ek : e) total += cfg.plan.global_iters * ek;
  return total;
}

/// Repairs a dual-recovered allocation into a strictly feasible primal:
/// clamps the time budget, then scales the energies up until every device
/// meets the bit target under time-sharing.
inline Primal repair_primal(const SystemConfig& cfg, std::vector<double> f,
                            std::vector<double> e, double t_up,
                            const Eigen::VectorXd& lambda, double common_rate) {
  const int K = cfg.num_devices();
  const int N = cfg.plan.local_iters;
  const double S = cfg.plan.upload_bits;
  const double budget = round_budget(cfg);
  Primal pr;

  for (int k = 0; k < K; ++k)
    f[k] = std::clamp(f[k], cpu_freq_floor(cfg.devices[k]), cfg.devices[k].max_cpu_freq);
  auto straggler = [&]() {
    double t = 0.0;
    for (int k = 0; k < K; ++k) t = std::max(t, cfg.devices[k].cycles_per_update() / f[k]);
    return t;
  };

  double t_loc = straggler();
  double t_up_min = S / common_rate;
  if (N * t_loc + t_up > budget) {
    t_up = budget - N * t_loc;
    if (t_up < t_up_min) {
      t_up = t_up_min;
      double t_loc_target = (budget - t_up) / N;
      if (!(t_loc_target > 0)) return pr;
      for (int k = 0; k < K; ++k) {
        double need = cfg.devices[k].cycles_per_update() / t_loc_target;
        f[k] = std::clamp(std::max(f[k], need), cpu_freq_floor(cfg.devices[k]),
                          cfg.devices[k].max_cpu_freq);
      }
      t_loc = straggler();
      if (N * t_loc + t_up > budget * (1 + 1e-9)) return pr;
    }
  }
  if (!(t_up > 0)) return pr;

  double e_cap = cfg.max_power * t_up;
  for (int k = 0; k < K; ++k) e[k] = std::clamp(e[k], 0.0, e_cap);

  auto min_bits_at = [&](double gamma, TimeShared* out) {
    std::vector<double> eg(K);
    for (int k = 0; k < K; ++k) eg[k] = std::min(e[k] * gamma, e_cap);
    TimeShared ts = time_share_bits(lambda, eg, t_up, cfg, S);
    if (out) { *out = ts; }
    double mn = *std::min_element(ts.s.begin(), ts.s.end());
    return std::make_pair(mn, eg);
  };

  double gamma_hi = 1.0;
  for (int k = 0; k < K; ++k)
    if (e[k] > 0) gamma_hi = std::max(gamma_hi, e_cap / e[k]);
  gamma_hi = std::min(gamma_hi, 1e12);

  TimeShared ts;
  auto [mn1, e1] = min_bits_at(1.0, &ts);
  std::vector<double> e_final = e1;
  if (mn1 < S * (1 - 1e-12)) {
    auto [mn_hi, e_hi] = min_bits_at(gamma_hi, &ts);
    if (mn_hi < S * (1 - 1e-12)) {
      // even the capped energies fall short with this weight profile: use the
      // full-power max-min time-shared point
      std::vector<double> ecap(K, e_cap);
      TimeShared full = time_share_bits(Eigen::VectorXd::Ones(K), ecap, t_up, cfg, S);
      if (*std::min_element(full.s.begin(), full.s.end()) < S * (1 - 1e-9)) return pr;
      ts = full;
      e_final = ecap;
    } else {
      double lo = 1.0, hi = gamma_hi;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        auto [mn, eg] = min_bits_at(mid, nullptr);
        if (mn >= S * (1 - 1e-12)) hi = mid; else lo = mid;
      }
      auto [mn, eg] = min_bits_at(hi, &ts);
      (void)mn;
      e_final = eg;
    }
  }

  pr.f = f;
  pr.e = e_final;
  pr.s = ts.s;
  pr.decoding = ts.orders;
  pr.t_up = t_up;
  pr.t_loc = t_loc;
  pr.energy = primal_energy(cfg, f, e_final);
  pr.feasible = true;
  return pr;
}

/// Minimum total communication energy delivering `S` bits per device in a
/// window `t`, via the greedy corner that hands the k-th received-energy
/// increment to the k-th weakest channel. Returns +inf if the power cap
/// binds (the caller falls back to full-power time sharing there).
inline double corner_comm_energy(const SystemConfig& cfg, double t, std::vector<double>* e_out) {
  const int K = cfg.num_devices();
  const double B = cfg.channel.bandwidth, sigma2 = cfg.channel.noise_power;
  const double S = cfg.plan.upload_bits;
  if (S / (B * t) * K > 60.0) return std::numeric_limits<double>::infinity();
  std::vector<int> asc(K);
  std::iota(asc.begin(), asc.end(), 0);
  std::sort(asc.begin(), asc.end(), [&](int a, int b) {
    if (cfg.channel_gains[a] != cfg.channel_gains[b])
      return cfg.channel_gains[a] < cfg.channel_gains[b];
    return a < b;
  });
  double total = 0.0, prev = 0.0;
  std::vector<double> e(K, 0.0);
  for (int k = 0; k < K; ++k) {
    double cum = t * sigma2 * (std::exp2((k + 1) * S / (B * t)) - 1.0);
    double ek = (cum - prev) / cfg.channel_gains[asc[k]];
    prev = cum;
    if (ek > cfg.max_power * t * (1 + 1e-12)) return std::numeric_limits<double>::infinity();
    e[asc[k]] = ek;
    total += ek;
  }
  if (e_out) *e_out = e;
  return total;
}

/// Structured 1-D primal search over the upload window: the remaining round
/// time fixes the frequencies, and the communication energy is the exact
/// minimum for equal per-device bits.
inline std::vector<Primal> polish_candidates(const SystemConfig& cfg, double common_rate) {
  const int K = cfg.num_devices();
  const int N = cfg.plan.local_iters;
  const double S = cfg.plan.upload_bits;
  const double budget = round_budget(cfg);
  std::vector<Primal> out;

  double t_loc_min = 0.0;
  for (const auto& d : cfg.devices)
    t_loc_min = std::max(t_loc_min, d.cycles_per_update() / d.max_cpu_freq);
  double t_lo = S / common_rate;
  double t_hi = budget - N * t_loc_min;
  if (t_hi < t_lo * (1 - 1e-12)) return out;
  t_hi = std::max(t_hi, t_lo);

  auto freqs_at = [&](double t) {
    std::vector<double> f(K);
    double t_loc = (budget - t) / N;
    for (int k = 0; k < K; ++k) {
      double need = (t_loc > 0) ? cfg.devices[k].cycles_per_update() / t_loc
                                : std::numeric_limits<double>::infinity();
      f[k] = std::clamp(need, cpu_freq_floor(cfg.devices[k]), cfg.devices[k].max_cpu_freq);
    }
    return f;
  };

  // corner-construction candidate on its cap-feasible sub-interval
  auto corner_ok = [&](double t) {
    return std::isfinite(corner_comm_energy(cfg, t, nullptr));
  };
  if (corner_ok(t_hi)) {
    double tc = t_lo;
    if (!corner_ok(t_lo)) {
      double lo = t_lo, hi = t_hi;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (corner_ok(mid)) hi = mid; else lo = mid;
      }
      tc = hi;
    }
    auto energy_at = [&](double t) {
      double comm = corner_comm_energy(cfg, t, nullptr);
      if (!std::isfinite(comm)) return std::numeric_limits<double>::infinity();
      return computation_energy(cfg, freqs_at(t)) + cfg.plan.global_iters * comm;
    };
    auto [t_best, e_best] = golden_section_min(energy_at, tc, t_hi, 1e-12, 300);
    (void)e_best;
    Primal pr;
    std::vector<double> e;
    double comm = corner_comm_energy(cfg, t_best, &e);
    if (std::isfinite(comm)) {
      pr.f = freqs_at(t_best);
      pr.e = e;
      pr.s.assign(K, S);
      pr.t_up = t_best;
      pr.t_loc = (budget - t_best) / N;
      DecodingOrder o = DecodingOrder::identity(K);
      std::sort(o.perm.begin(), o.perm.end(), [&](int a, int b) {
        if (cfg.channel_gains[a] != cfg.channel_gains[b])
          return cfg.channel_gains[a] < cfg.channel_gains[b];
        return a < b;
      });
      pr.decoding.emplace_back(o, 1.0);
      pr.energy = primal_energy(cfg, pr.f, pr.e);
      pr.feasible = true;
      out.push_back(std::move(pr));
    }
  }

  // full-power time-shared candidate (covers the cap-limited regime)
  {
    auto energy_at = [&](double t) {
      return computation_energy(cfg, freqs_at(t)) +
             cfg.plan.global_iters * K * cfg.max_power * t;
    };
    auto [t_best, e_best] = golden_section_min(energy_at, t_lo, t_hi, 1e-12, 300);
    (void)e_best;
    std::vector<double> ecap(K, cfg.max_power * t_best);
    TimeShared ts = time_share_bits(Eigen::VectorXd::Ones(K), ecap, t_best, cfg, S);
    if (*std::min_element(ts.s.begin(), ts.s.end()) >= S * (1 - 1e-9)) {
      Primal pr;
      pr.f = freqs_at(t_best);
      pr.e = ecap;
      pr.s = ts.s;
      pr.decoding = ts.orders;
      pr.t_up = t_best;
      pr.t_loc = (budget - t_best) / N;
      pr.energy = primal_energy(cfg, pr.f, pr.e);
      pr.feasible = true;
      out.push_back(std::move(pr));
    }
  }
  return out;
}

}  // namespace detail_noma

struct NomaSolveOptions {
  double dual_tol = 1e-11;
  int max_iter_scale = 150;  // ellipsoid cap = max(3000, scale*n^2)
};

/// Full (P1) pipeline: feasibility check, ellipsoid dual ascent over
/// (lambda, mu, nu) with feasibility cuts, and primal recovery with
/// time-sharing.
inline NomaSolution solve_p1(const SystemConfig& cfg, const NomaSolveOptions& opt = {}) {
  cfg.validate();
  const int K = cfg.num_devices();
  const int M = cfg.plan.global_iters, N = cfg.plan.local_iters;
  const double S = cfg.plan.upload_bits, T = cfg.plan.max_delay;
  const int n = 2 * K + 1;

  NomaSolution sol;
  double rbar = max_common_rate(cfg);
  if (t_min_noma(cfg) > T * (1 + 1e-12)) {
    sol.status = SolveStatus::Infeasible;
    return sol;
  }

  // rough energy scale from the delay-minimizing operating point
  double t_up_min = S / rbar;
  double e_rough = 0.0;
  for (const auto& d : cfg.devices)
    e_rough += M * (N * d.cycles_per_update() * d.capacitance_coeff *
                        d.max_cpu_freq * d.max_cpu_freq +
                    cfg.max_power * t_up_min);

  double h_mean = 0.0;
  for (double h : cfg.channel_gains) h_mean += h;
  h_mean /= K;
  double lam_scale = std::max(1e-300, M * cfg.channel.noise_power * round_budget(cfg) /
                                          (h_mean * S));
  double nu_scale = std::max(1e-300, e_rough / T);
  double mu_scale = std::max(1e-300, nu_scale * M * N / (2.0 * K));

  auto unpack = [&](const Eigen::VectorXd& z) {
    NomaDualPoint pt;
    pt.lambda = (z.head(K) * lam_scale).cwiseMax(0.0);
    pt.mu = (z.segment(K, K) * mu_scale).cwiseMax(0.0);
    pt.nu = std::max(0.0, z[2 * K] * nu_scale);
    return pt;
  };

  std::vector<double> warm_q;
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
    double lhs = z.segment(K, K).sum() * mu_scale - z[2 * K] * nu_scale * M * N;
    if (lhs > 0) {
      cut.kind = CutKind::Feasibility;
      cut.subgradient = Eigen::VectorXd::Zero(n);
      cut.subgradient.segment(K, K).setConstant(mu_scale);
      cut.subgradient[2 * K] = -nu_scale * M * N;
      return cut;
    }
    NomaDualEval ev = dual_value_noma(unpack(z), cfg, &warm_q);
    cut.kind = CutKind::Objective;
    cut.value = ev.value;
    cut.subgradient.resize(n);
    cut.subgradient.head(K) = ev.subgradient.head(K) * lam_scale;
    cut.subgradient.segment(K, K) = ev.subgradient.segment(K, K) * mu_scale;
    cut.subgradient[2 * K] = ev.subgradient[2 * K] * nu_scale;
    return cut;
  };

  Eigen::VectorXd center = Eigen::VectorXd::Ones(n);
  center[2 * K] = 2.0;  // start strictly inside the nu*M*N >= sum(mu) cone
  double radius = 1e6 * center.norm();
  int max_iter = std::max(3000, opt.max_iter_scale * n * n);
  EllipsoidResult er = ellipsoid_max(oracle, center, radius, opt.dual_tol, max_iter);

  NomaDualPoint dual = unpack(er.point);
  NomaDualEval ev = dual_value_noma(dual, cfg);
  sol.dual = dual;
  sol.dual_value = er.value;

  // primal recovery at the optimal duals, then feasibility repair
  std::vector<detail_noma::Primal> candidates;
  candidates.push_back(detail_noma::repair_primal(cfg, ev.cpu_freqs, ev.energies, ev.t_up,
                                                  dual.lambda, rbar));
  for (auto& pc : detail_noma::polish_candidates(cfg, rbar)) candidates.push_back(std::move(pc));

  const detail_noma::Primal* best = nullptr;
  for (const auto& c : candidates)
    if (c.feasible && (!best || c.energy < best->energy)) best = &c;
  if (!best) {
    sol.status = SolveStatus::ToleranceNotMet;
    return sol;
  }

  sol.cpu_freqs = best->f;
  sol.energies = best->e;
  sol.bits = best->s;
  sol.t_up = best->t_up;
  sol.t_loc = best->t_loc;
  sol.decoding = best->decoding;
  sol.powers.resize(K);
  sol.rates.resize(K);
  for (int k = 0; k < K; ++k) {
    sol.powers[k] = best->e[k] / best->t_up;
    sol.rates[k] = best->s[k] / best->t_up;
  }
  sol.energy_comp = computation_energy(cfg, best->f);
  sol.energy_comm = best->energy - sol.energy_comp;
  sol.energy_total = best->energy;
  sol.duality_gap_rel = (sol.energy_total - sol.dual_value) / std::max(1.0, sol.energy_total);
  sol.status = er.tol_met ? SolveStatus::Optimal : SolveStatus::ToleranceNotMet;
  return sol;
}

}  // namespace fedopt

#endif  // FEDOPT_SOLVER_NOMA_HPP
