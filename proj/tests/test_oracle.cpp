#include <gtest/gtest.h>

#include "fedopt/oracle.hpp"
#include "fixtures.hpp"

using namespace fedopt;
using fedopt::testing::desk_a;

TEST(Oracle, GridMatchesNomaSolverOnDesk) {
  SystemConfig cfg = desk_a();
  NomaSolution solver = solve_p1(cfg);
  NomaSolution grid = grid_solve_noma(cfg, 200);
  ASSERT_EQ(grid.status, SolveStatus::Optimal);
  EXPECT_NEAR(grid.energy_total, solver.energy_total, 0.02 * grid.energy_total);
  // the grid point is honest: never below the dual bound
  EXPECT_GE(grid.energy_total, solver.dual_value * (1 - 1e-9));
}

TEST(Oracle, GridMatchesTdmaSolverOnDesk) {
  SystemConfig cfg = desk_a();
  TdmaSolution solver = solve_p2(cfg);
  TdmaSolution grid = grid_solve_tdma(cfg, 200);
  ASSERT_EQ(grid.status, SolveStatus::Optimal);
  EXPECT_NEAR(grid.energy_total, solver.energy_total, 0.02 * grid.energy_total);
  EXPECT_GE(grid.energy_total, solver.dual_value * (1 - 1e-9));
}

TEST(Oracle, SingleDeviceTdmaMatchesReducedGoldenSection) {
  SystemConfig cfg = desk_a();
  cfg.devices.resize(1);
  cfg.recompute_gains();
  const int N = cfg.plan.local_iters;
  const double budget = round_budget(cfg);
  // 1-D reduction: slot t fixes t_loc = (budget - t)/N and hence f
  auto energy_at = [&](double t) {
    double t_loc = (budget - t) / N;
    double f = std::clamp(cfg.devices[0].cycles_per_update() / t_loc,
                          cpu_freq_floor(cfg.devices[0]), cfg.devices[0].max_cpu_freq);
    if (cfg.devices[0].cycles_per_update() / f > t_loc * (1 + 1e-12))
      return std::numeric_limits<double>::infinity();
    std::vector<double> fs{f};
    return computation_energy(cfg, fs) +
           cfg.plan.global_iters * upload_energy_given_time(cfg.plan.upload_bits, t,
                                                            cfg.channel_gains[0],
                                                            cfg.channel.noise_power,
                                                            cfg.channel.bandwidth);
  };
  double cap = min_slot_time(cfg.plan.upload_bits, cfg.channel_gains[0], cfg.max_power,
                             cfg.channel.noise_power, cfg.channel.bandwidth);
  double t_hi = budget - N * cfg.devices[0].cycles_per_update() / cfg.devices[0].max_cpu_freq;
  auto [t_best, e_best] = golden_section_min(energy_at, cap, t_hi, 1e-12, 400);
  (void)t_best;
  TdmaSolution grid = grid_solve_tdma(cfg, 400);
  EXPECT_NEAR(grid.energy_total, e_best, 0.005 * e_best);
}

TEST(Oracle, InfeasibleBudgetYieldsNoGridPoint) {
  SystemConfig cfg = desk_a();
  cfg.plan.max_delay = 4.0;
  EXPECT_EQ(grid_solve_noma(cfg, 50).status, SolveStatus::Infeasible);
  EXPECT_EQ(grid_solve_tdma(cfg, 50).status, SolveStatus::Infeasible);
}

TEST(Oracle, SizeAndResolutionLimits) {
  SystemConfig cfg = desk_a();
  cfg.devices.resize(4, cfg.devices[0]);
  cfg.recompute_gains();
  EXPECT_THROW(grid_solve_noma(cfg, 50), std::invalid_argument);
  EXPECT_THROW(grid_solve_tdma(cfg, 50), std::invalid_argument);
  SystemConfig ok = desk_a();
  EXPECT_THROW(grid_solve_noma(ok, 1), std::invalid_argument);
  EXPECT_THROW(grid_solve_tdma(ok, 500), std::invalid_argument);
}

TEST(Oracle, AuditPassesOnSolverOutput) {
  SystemConfig cfg = desk_a();
  NomaSolution sol = solve_p1(cfg);
  AuditReport rep = audit_solution(sol, cfg);
  EXPECT_TRUE(rep.pass);
  EXPECT_TRUE(rep.slackness_applicable);
  EXPECT_LE(rep.max_constraint_violation, 1e-5);
  for (double r : rep.complementary_slackness_residuals) EXPECT_LE(r, 1e-5);

  TdmaSolution tsol = solve_p2(cfg);
  AuditReport trep = audit_solution(tsol, cfg);
  EXPECT_TRUE(trep.pass);
  for (double r : trep.complementary_slackness_residuals) EXPECT_LE(r, 1e-5);
}

TEST(Oracle, AuditFlagsPerturbedEnergies) {
  SystemConfig cfg = desk_a();
  NomaSolution sol = solve_p1(cfg);
  ASSERT_TRUE(audit_solution(sol, cfg).pass);
  NomaSolution bad = sol;
  double extra = 0.0;
  for (int k = 0; k < 2; ++k) {
    extra += cfg.plan.global_iters * 0.05 * bad.energies[k];
    bad.energies[k] *= 1.05;
    bad.powers[k] *= 1.05;
  }
  bad.energy_comm += extra;
  bad.energy_total += extra;  // consistent bookkeeping, but suboptimal operation
  EXPECT_FALSE(audit_solution(bad, cfg).pass);
}

TEST(Oracle, AuditOfBaselineSkipsSlackness) {
  SystemConfig cfg = desk_a();
  NomaSolution dmin = solve_baseline_noma(cfg, SchemeId::DelayMin);
  AuditReport rep = audit_solution(dmin, cfg);
  EXPECT_FALSE(rep.slackness_applicable);
  EXPECT_TRUE(rep.complementary_slackness_residuals.empty());
  EXPECT_LE(rep.max_constraint_violation, 1e-6);
  EXPECT_TRUE(rep.pass);
}

TEST(Oracle, AuditCatchesConstraintViolations) {
  SystemConfig cfg = desk_a();
  NomaSolution sol = solve_p1(cfg);
  NomaSolution bad = sol;
  bad.cpu_freqs[0] = 2e9;  // above f_max
  AuditReport rep = audit_solution(bad, cfg);
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(rep.max_constraint_violation, 0.5);
}
