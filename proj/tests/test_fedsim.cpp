#include <gtest/gtest.h>

#include <sstream>

#include "fedopt/fedsim.hpp"

using namespace fedopt;

namespace {

Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd x(1);
  x << v;
  return x;
}

Dataset single_sample() {
  Dataset ds;
  ds.devices = {{Sample{vec1(1.0), 2.0}}};
  return ds;
}

}  // namespace

TEST(Fedsim, SampleLoss) {
  EXPECT_DOUBLE_EQ(sample_loss({vec1(0.0)}, vec1(1.0), 2.0), 2.0);
  EXPECT_DOUBLE_EQ(sample_loss({vec1(2.0)}, vec1(1.0), 2.0), 0.0);
  EXPECT_DOUBLE_EQ(sample_loss({vec1(0.0)}, vec1(1.0), 4.0), 8.0);  // y doubled, 4x loss
  Eigen::VectorXd w2(2);
  w2 << 1.0, 1.0;
  EXPECT_THROW(sample_loss({w2}, vec1(1.0), 0.0), std::invalid_argument);
}

TEST(Fedsim, DeviceLossGrad) {
  auto [loss, grad] = device_loss_grad({vec1(0.0)}, single_sample().devices[0]);
  EXPECT_DOUBLE_EQ(loss, 2.0);
  EXPECT_DOUBLE_EQ(grad[0], -2.0);
  EXPECT_THROW(device_loss_grad({vec1(0.0)}, DeviceData{}), std::invalid_argument);
}

TEST(Fedsim, GradientMatchesFiniteDifferences) {
  Dataset ds = make_synthetic_dataset(1, 16, 4, 0.3, 5);
  ModelParams w{Eigen::VectorXd::Constant(4, 0.37)};
  auto [loss, grad] = device_loss_grad(w, ds.devices[0]);
  (void)loss;
  for (int i = 0; i < 4; ++i) {
    double eps = 1e-6;
    ModelParams wp = w, wm = w;
    wp.w[i] += eps;
    wm.w[i] -= eps;
    double fd = (device_loss_grad(wp, ds.devices[0]).first -
                 device_loss_grad(wm, ds.devices[0]).first) / (2 * eps);
    EXPECT_NEAR(grad[i], fd, 1e-6);
  }
}

TEST(Fedsim, GlobalLossWeightsBySize) {
  Dataset ds;
  ds.devices = {{Sample{vec1(1.0), 2.0}},  // loss 2 at w=0, weight 1
                {Sample{vec1(1.0), 0.0}, Sample{vec1(1.0), 0.0},
                 Sample{vec1(1.0), 0.0}}};  // loss 0, weight 3
  // sizes (1,3), device losses (2,0) -> weighted mean 0.5; scale y to match
  // the documented example (4,0) -> 1.0
  ds.devices[0][0].y = std::sqrt(8.0);
  EXPECT_NEAR(global_loss({vec1(0.0)}, ds), 1.0, 1e-12);
}

TEST(Fedsim, RoundHandIteration) {
  // K=1, x=1, y=2, eta=0.5, N=2: 0 -> 1 -> 1.5
  ModelParams out = federated_round({vec1(0.0)}, single_sample(), 0.5, 2);
  EXPECT_DOUBLE_EQ(out.w[0], 1.5);
}

TEST(Fedsim, FixedPointAtOptimum) {
  Dataset ds;
  ds.devices = {{Sample{vec1(1.0), 2.0}}, {Sample{vec1(1.0), 2.0}}};
  ModelParams out = federated_round({vec1(2.0)}, ds, 0.3, 5);
  EXPECT_NEAR(out.w[0], 2.0, 1e-15);
}

TEST(Fedsim, PermutationInvariance) {
  Dataset ds = make_synthetic_dataset(4, 8, 3, 0.2, 17);
  Dataset shuffled = ds;
  std::swap(shuffled.devices[0], shuffled.devices[3]);
  std::swap(shuffled.devices[1], shuffled.devices[2]);
  ModelParams w0{Eigen::VectorXd::Zero(3)};
  Eigen::VectorXd a = federated_round(w0, ds, 0.05, 3).w;
  Eigen::VectorXd b = federated_round(w0, shuffled, 0.05, 3).w;
  EXPECT_NEAR((a - b).norm(), 0.0, 1e-15);
}

TEST(Fedsim, EquivalenceWithCentralizedGradientDescent) {
  Dataset ds = make_synthetic_dataset(2, 16, 3, 0.1, 7);
  ModelParams w0{Eigen::VectorXd::Zero(3)};
  TrainingTrajectory fed = run_training(ds, 0.05, 100, 1, w0);

  // centralized: one full-batch step on the pooled (equal-size) data
  Dataset pooled;
  pooled.devices.resize(1);
  for (const auto& d : ds.devices)
    pooled.devices[0].insert(pooled.devices[0].end(), d.begin(), d.end());
  Eigen::VectorXd w = w0.w;
  for (int i = 0; i <= 100; ++i) {
    EXPECT_NEAR((fed.params[i].w - w).norm(), 0.0, 1e-12) << "round " << i;
    w -= 0.05 * device_loss_grad({w}, pooled.devices[0]).second;
  }
}

TEST(Fedsim, LossNonIncreasingBelowStabilityThreshold) {
  Dataset ds = make_synthetic_dataset(3, 20, 4, 0.2, 31);
  // stability threshold from the pooled Gram spectrum
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(4, 4);
  int n = 0;
  for (const auto& d : ds.devices)
    for (const auto& s : d) {
      gram += s.x * s.x.transpose();
      ++n;
    }
  gram /= n;
  double L = gram.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
  TrainingTrajectory tr = run_training(ds, 0.9 / L, 60, 1, {Eigen::VectorXd::Zero(4)});
  for (size_t i = 1; i < tr.losses.size(); ++i)
    EXPECT_LE(tr.losses[i], tr.losses[i - 1] * (1 + 1e-12));
}

TEST(Fedsim, DivergenceGuard) {
  Dataset ds = make_synthetic_dataset(1, 8, 2, 0.1, 3);
  EXPECT_THROW(run_training(ds, 1e12, 400, 5, {Eigen::VectorXd::Zero(2)}),
               std::runtime_error);
}

TEST(Fedsim, ZeroRoundsTrajectory) {
  Dataset ds = make_synthetic_dataset(2, 4, 2, 0.1, 3);
  TrainingTrajectory tr = run_training(ds, 0.1, 0, 1, {Eigen::VectorXd::Zero(2)});
  EXPECT_EQ(tr.params.size(), 1u);
  EXPECT_EQ(tr.losses.size(), 1u);
}

TEST(Fedsim, TrajectoryCsvShape) {
  Dataset ds = make_synthetic_dataset(2, 8, 2, 0.1, 3);
  TrainingTrajectory tr = run_training(ds, 0.05, 3, 1, {Eigen::VectorXd::Zero(2)});
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "round,global_loss,w0,w1");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4);  // M+1
}
