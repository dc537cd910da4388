#include <gtest/gtest.h>

#include "fedopt/baselines.hpp"
#include "fedopt/solver_tdma.hpp"
#include "fixtures.hpp"

using namespace fedopt;
using fedopt::testing::desk_a;

namespace {
const double kB = 2e6, kSigma2 = 1e-13, kGain = 1e-9;
}

TEST(TdmaSolver, MinimumDelayOracle) {
  EXPECT_NEAR(t_min_tdma(desk_a()), 4.40132, 1e-4);
  EXPECT_LE(t_min_noma(desk_a()), t_min_tdma(desk_a()));
}

TEST(TdmaSolver, UploadEnergyFormula) {
  // bits/(B*t) = 1 -> (2^1 - 1) * t * sigma2 / h
  EXPECT_NEAR(upload_energy_given_time(2e6, 1.0, kGain, kSigma2, kB), 1e-4, 1e-12);
  // Shannon floor S*ln2*sigma2/(B*h) as the slot grows
  double floor_energy = 2e6 * std::log(2.0) * kSigma2 / (kB * kGain);
  EXPECT_NEAR(upload_energy_given_time(2e6, 1e5, kGain, kSigma2, kB), floor_energy,
              0.01 * floor_energy);
  EXPECT_NEAR(floor_energy, 6.93e-5, 1e-7);
  // absurdly small slots overflow to +inf instead of garbage
  EXPECT_TRUE(std::isinf(upload_energy_given_time(2e6, 1e-9, kGain, kSigma2, kB)));
}

TEST(TdmaSolver, MinSlotTimeMatchesCapRate) {
  double cap = min_slot_time(2e6, kGain, 0.1, kSigma2, kB);
  EXPECT_NEAR(cap, 2e6 / (kB * std::log2(1001.0)), 1e-12);
  // at the cap slot the transmit power is exactly P_max
  double e = upload_energy_given_time(2e6, cap, kGain, kSigma2, kB);
  EXPECT_NEAR(e / cap, 0.1, 1e-9);
}

TEST(TdmaSolver, StationarySlotRootOracle) {
  // noise/gain = 1e-4, bits/B = 1 s, zeta = 7.58991e-6 -> slot ~ 2.0 s
  double t = optimal_upload_time(7.58991e-6, 2e6, kGain, kSigma2, kB, 1e6, 100.0);
  EXPECT_NEAR(t, 2.0, 1e-3);
  // zero price pushes the slot to the ceiling
  EXPECT_DOUBLE_EQ(optimal_upload_time(0.0, 2e6, kGain, kSigma2, kB, 0.1, 50.0), 50.0);
  // huge price pins the slot at the power cap
  double cap = min_slot_time(2e6, kGain, 0.1, kSigma2, kB);
  EXPECT_NEAR(optimal_upload_time(1e3, 2e6, kGain, kSigma2, kB, 0.1, 50.0), cap, 1e-9);
}

TEST(TdmaSolver, DualFeasibilityMirror) {
  TdmaDualPoint pt;
  pt.omega = Eigen::VectorXd::Constant(2, 1.0);
  pt.zeta = 1.0;
  EXPECT_TRUE(pt.feasible(2, 2));
  pt.zeta = 0.4;
  EXPECT_FALSE(pt.feasible(2, 2));
  EXPECT_THROW(dual_value_tdma(pt, desk_a()), std::invalid_argument);
}

TEST(TdmaSolver, WeakDualityAgainstDelayMin) {
  SystemConfig cfg = desk_a();
  double primal = solve_baseline_tdma(cfg, SchemeId::DelayMin).energy_total;
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    TdmaDualPoint pt;
    pt.zeta = 0.3 * u(rng);
    pt.omega = Eigen::VectorXd::NullaryExpr(2, [&](int) { return u(rng) * pt.zeta * 2.0; });
    if (!pt.feasible(2, 2)) continue;
    EXPECT_LE(dual_value_tdma(pt, cfg).value, primal * (1 + 1e-6));
  }
}

TEST(TdmaSolver, DeskSolveIsOptimalWithSmallGap) {
  SystemConfig cfg = desk_a();
  TdmaSolution sol = solve_p2(cfg);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_LE(sol.duality_gap_rel, 1e-3);

  double used = std::accumulate(sol.slot_times.begin(), sol.slot_times.end(), 0.0);
  double delay = cfg.plan.global_iters * (cfg.plan.local_iters * sol.t_loc + used);
  EXPECT_LE(delay, cfg.plan.max_delay * (1 + 1e-9));
  for (int k = 0; k < 2; ++k) {
    EXPECT_LE(sol.powers[k], cfg.max_power * (1 + 1e-6));
    EXPECT_LE(cfg.devices[k].cycles_per_update() / sol.cpu_freqs[k], sol.t_loc * (1 + 1e-9));
  }
  EXPECT_NEAR(sol.energy_total, sol.energy_comm + sol.energy_comp, 1e-12);
  EXPECT_LE(sol.energy_total,
            solve_baseline_tdma(cfg, SchemeId::DelayMin).energy_total * (1 + 1e-9));
}

TEST(TdmaSolver, InfeasibleBelowMinimumDelay) {
  SystemConfig cfg = desk_a();
  cfg.plan.max_delay = 4.0;  // below t_min = 4.40132
  EXPECT_EQ(solve_p2(cfg).status, SolveStatus::Infeasible);
}

TEST(TdmaSolver, LooseDelayLowersEnergy) {
  SystemConfig tight = desk_a(), loose = desk_a();
  tight.plan.max_delay = 5.0;
  loose.plan.max_delay = 30.0;
  EXPECT_LE(solve_p2(loose).energy_total, solve_p2(tight).energy_total * (1 + 1e-6));
}

TEST(TdmaSolver, SingleDeviceScenario) {
  SystemConfig cfg = desk_a();
  cfg.devices.resize(1);
  cfg.recompute_gains();
  TdmaSolution sol = solve_p2(cfg);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_LE(sol.duality_gap_rel, 1e-3);
}
