#ifndef FEDOPT_SOLVER_COMMON_HPP
#define FEDOPT_SOLVER_COMMON_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include "fedopt/scenario.hpp"

namespace fedopt {

enum class SolveStatus { Optimal, Infeasible, ToleranceNotMet };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::ToleranceNotMet: return "tolerance-not-met";
  }
  return "?";
}

/// The CPU-frequency domain is open at zero; a zero dual weight would push the
/// closed-form minimizer to f = 0 and make the local-update time blow up, so
/// frequencies are floored at a small fraction of f_max.
inline constexpr double kCpuFreqFloorFraction = 1e-6;

inline double cpu_freq_floor(const DeviceProfile& device) {
  return kCpuFreqFloorFraction * device.max_cpu_freq;
}

/// Closed-form minimizer of M*N*(F/C)*varsigma*f^2 + (F/C)*w/f over the
/// clamped frequency range (same form for the NOMA mu_k and TDMA omega_k
/// subproblems).
inline double optimal_cpu_frequency(double dual_weight, const DeviceProfile& device, int M, int N) {
  if (dual_weight < 0) throw std::invalid_argument("optimal_cpu_frequency: dual_weight >= 0 required");
  double f = std::cbrt(dual_weight / (2.0 * M * N * device.capacitance_coeff));
  return std::clamp(f, cpu_freq_floor(device), device.max_cpu_freq);
}

/// M * N * (F_k/C_k) * varsigma_k * f_k^2 summed over devices.
template <typename FreqVec>
double computation_energy(const SystemConfig& cfg, const FreqVec& freqs) {
  double total = 0.0;
  for (int k = 0; k < cfg.num_devices(); ++k)
    total += cfg.plan.global_iters * cfg.plan.local_iters *
             cfg.devices[k].cycles_per_update() * cfg.devices[k].capacitance_coeff *
             freqs[k] * freqs[k];
  return total;
}

/// Per-round time budget T/M.
inline double round_budget(const SystemConfig& cfg) {
  return cfg.plan.max_delay / cfg.plan.global_iters;
}

}  // namespace fedopt

#endif  // FEDOPT_SOLVER_COMMON_HPP
