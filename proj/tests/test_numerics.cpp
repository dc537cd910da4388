#include <gtest/gtest.h>

#include <cmath>

#include "fedopt/numerics.hpp"

using namespace fedopt;

TEST(Bisect, FindsSqrtTwo) {
  double r = bisect_root([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-12);
  EXPECT_NEAR(r, std::sqrt(2.0), 1e-11);
}

TEST(Bisect, RejectsBadBracket) {
  EXPECT_THROW(bisect_root([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-9),
               BracketError);
  EXPECT_THROW(bisect_root([](double x) { return x; }, 1.0, 0.0, 1e-9),
               std::invalid_argument);
}

TEST(Golden, QuadraticMinimum) {
  auto [x, f] = golden_section_min([](double x) { return (x - 3.0) * (x - 3.0); }, 0.0, 10.0,
                                   1e-10);
  EXPECT_NEAR(x, 3.0, 1e-6);
  EXPECT_NEAR(f, 0.0, 1e-12);
}

TEST(Golden, EndpointMinimum) {
  auto [x, f] = golden_section_min([](double x) { return x; }, 2.0, 5.0, 1e-10);
  EXPECT_NEAR(x, 2.0, 1e-6);
  EXPECT_NEAR(f, 2.0, 1e-6);
}

TEST(ProjectedGradient, BoxClampedQuadratic) {
  // minimize |x - (3, -2)|^2 over [0,1]^2 -> (1, 0)
  Eigen::Vector2d target(3.0, -2.0);
  auto f = [&](const Eigen::VectorXd& x) { return (x - target).squaredNorm(); };
  auto g = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return 2.0 * (x - target); };
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(2), hi = Eigen::VectorXd::Ones(2);
  Eigen::VectorXd x = minimize_convex_box(f, g, lo, hi, 1e-12, 1000);
  EXPECT_NEAR(x[0], 1.0, 1e-9);
  EXPECT_NEAR(x[1], 0.0, 1e-9);
}

TEST(ProjectedGradient, InteriorQuadraticWithWarmStart) {
  Eigen::VectorXd target(3);
  target << 0.25, 0.5, 0.75;
  auto f = [&](const Eigen::VectorXd& x) { return 0.5 * (x - target).squaredNorm(); };
  auto g = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x - target; };
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(3), hi = Eigen::VectorXd::Ones(3);
  Eigen::VectorXd warm = Eigen::VectorXd::Constant(3, 0.9);
  Eigen::VectorXd x = minimize_convex_box(f, g, lo, hi, 1e-12, 1000, &warm);
  EXPECT_NEAR((x - target).norm(), 0.0, 1e-9);
}

TEST(Ellipsoid, OneDimensionalConcave) {
  auto oracle = [](const Eigen::VectorXd& x) {
    CutOracleResult cut;
    cut.kind = CutKind::Objective;
    cut.value = -(x[0] - 2.0) * (x[0] - 2.0);
    cut.subgradient = Eigen::VectorXd::Constant(1, -2.0 * (x[0] - 2.0));
    return cut;
  };
  EllipsoidResult res = ellipsoid_max(oracle, Eigen::VectorXd::Zero(1), 100.0, 1e-9, 2000);
  EXPECT_TRUE(res.tol_met);
  EXPECT_NEAR(res.point[0], 2.0, 1e-4);
  EXPECT_NEAR(res.value, 0.0, 1e-7);
}

TEST(Ellipsoid, FeasibilityCutsRespected) {
  // maximize -(x-3)^2 - (y+1)^2 subject to y >= 0 -> (3, 0), value -1
  auto oracle = [](const Eigen::VectorXd& x) {
    CutOracleResult cut;
    if (x[1] < 0) {
      cut.kind = CutKind::Feasibility;
      cut.subgradient = Eigen::VectorXd::Zero(2);
      cut.subgradient[1] = -1.0;
      return cut;
    }
    cut.kind = CutKind::Objective;
    cut.value = -std::pow(x[0] - 3.0, 2) - std::pow(x[1] + 1.0, 2);
    cut.subgradient = Eigen::VectorXd(2);
    cut.subgradient << -2.0 * (x[0] - 3.0), -2.0 * (x[1] + 1.0);
    return cut;
  };
  EllipsoidResult res = ellipsoid_max(oracle, Eigen::VectorXd::Zero(2), 50.0, 1e-9, 5000);
  EXPECT_TRUE(res.tol_met);
  EXPECT_GE(res.point[1], 0.0);
  EXPECT_NEAR(res.value, -1.0, 1e-5);
}

TEST(Ellipsoid, ZeroSubgradientIsOptimal) {
  auto oracle = [](const Eigen::VectorXd& x) {
    CutOracleResult cut;
    cut.kind = CutKind::Objective;
    cut.value = 7.0;  // constant objective: any point is optimal
    cut.subgradient = Eigen::VectorXd::Zero(3);
    return cut;
  };
  EllipsoidResult res = ellipsoid_max(oracle, Eigen::VectorXd::Ones(3), 10.0, 1e-9, 100);
  EXPECT_TRUE(res.tol_met);
  EXPECT_DOUBLE_EQ(res.value, 7.0);
  EXPECT_LT(res.iterations, 5);
}

TEST(Ellipsoid, NonsmoothObjective) {
  // maximize -|x - 1| - |y - 2|
  auto oracle = [](const Eigen::VectorXd& x) {
    CutOracleResult cut;
    cut.kind = CutKind::Objective;
    cut.value = -std::abs(x[0] - 1.0) - std::abs(x[1] - 2.0);
    cut.subgradient = Eigen::VectorXd(2);
    cut.subgradient << (x[0] > 1.0 ? -1.0 : 1.0), (x[1] > 2.0 ? -1.0 : 1.0);
    return cut;
  };
  EllipsoidResult res = ellipsoid_max(oracle, Eigen::VectorXd::Zero(2), 100.0, 1e-8, 5000);
  EXPECT_NEAR(res.point[0], 1.0, 1e-3);
  EXPECT_NEAR(res.point[1], 2.0, 1e-3);
}
