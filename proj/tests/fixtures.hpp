#ifndef FEDOPT_TESTS_FIXTURES_HPP
#define FEDOPT_TESTS_FIXTURES_HPP

#include <random>

#include "fedopt/scenario.hpp"
#include "fedopt/solver_noma.hpp"
#include "fedopt/solver_tdma.hpp"

namespace fedopt::testing {

/// Two identical devices at 100 m: f_max 1e9, 1e9 cycles per update,
/// M=N=2, S=2e6 bits, T=30 s. Everything about it is hand-checkable.
inline SystemConfig desk_a() {
  SystemConfig cfg;
  DeviceProfile d;
  d.flops_per_update = 1e9;
  d.distance = 100.0;
  cfg.devices = {d, d};
  cfg.plan.global_iters = 2;
  cfg.plan.local_iters = 2;
  cfg.plan.upload_bits = 2e6;
  cfg.plan.max_delay = 30.0;
  cfg.defaults_fingerprint = ScenarioDefaults{}.fingerprint();
  cfg.recompute_gains();
  return cfg;
}

inline double log_uniform(std::mt19937& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

/// Randomized feasible scenario: the delay budget is drawn as a multiple of
/// the TDMA minimum (which dominates the NOMA one).
inline SystemConfig random_feasible_scenario(std::mt19937& rng, int max_devices = 4) {
  SystemConfig cfg;
  std::uniform_int_distribution<int> kd(1, max_devices), md(1, 30), nd(1, 10);
  int K = kd(rng);
  for (int k = 0; k < K; ++k) {
    DeviceProfile d;
    d.flops_per_update = log_uniform(rng, 1e8, 4e9);
    d.distance = log_uniform(rng, 20.0, 500.0);
    cfg.devices.push_back(d);
  }
  cfg.plan.global_iters = md(rng);
  cfg.plan.local_iters = nd(rng);
  cfg.plan.upload_bits = log_uniform(rng, 1e5, 1e7);
  cfg.max_power = log_uniform(rng, 0.01, 1.0);
  cfg.plan.max_delay = 1.0;  // placeholder until t_min is known
  cfg.defaults_fingerprint = ScenarioDefaults{}.fingerprint();
  cfg.recompute_gains();
  double tmin = std::max(t_min_noma(cfg), t_min_tdma(cfg));
  cfg.plan.max_delay = tmin * log_uniform(rng, 1.2, 5.0);
  return cfg;
}

}  // namespace fedopt::testing

#endif
