#ifndef FEDOPT_FEDSIM_HPP
#define FEDOPT_FEDSIM_HPP

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fedopt {

struct Sample {
  Eigen::VectorXd x;
  double y = 0.0;
};

using DeviceData = std::vector<Sample>;

struct Dataset {
  std::vector<DeviceData> devices;

  int dim() const {
    for (const auto& d : devices)
      if (!d.empty()) return static_cast<int>(d.front().x.size());
    return 0;
  }
  void validate() const {
    if (devices.empty()) throw std::invalid_argument("dataset: no devices");
    int n = dim();
    for (const auto& d : devices) {
      if (d.empty()) throw std::invalid_argument("dataset: empty device shard");
      for (const auto& s : d)
        if (s.x.size() != n) throw std::invalid_argument("dataset: inconsistent dimension");
    }
  }
};

struct ModelParams {
  Eigen::VectorXd w;
};

struct TrainingTrajectory {
  std::vector<ModelParams> params;  // length M+1, starting point included
  std::vector<double> losses;       // global loss at each entry
  double eta = 0.0;
  int global_iters = 0;
  int local_iters = 0;
};

inline double sample_loss(const ModelParams& m, const Eigen::VectorXd& x, double y) {
  if (m.w.size() != x.size()) throw std::invalid_argument("sample_loss: dimension mismatch");
  double r = y - m.w.dot(x);
  return 0.5 * r * r;
}

inline std::pair<double, Eigen::VectorXd> device_loss_grad(const ModelParams& m,
                                                           const DeviceData& data) {
  if (data.empty()) throw std::invalid_argument("device_loss_grad: empty dataset");
  double loss = 0.0;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m.w.size());
  for (const auto& s : data) {
    double r = s.y - m.w.dot(s.x);
    loss += 0.5 * r * r;
    g -= r * s.x;
  }
  double inv = 1.0 / data.size();
  return {loss * inv, g * inv};
}

inline double global_loss(const ModelParams& m, const Dataset& ds) {
  ds.validate();
  double num = 0.0, den = 0.0;
  for (const auto& d : ds.devices) {
    num += device_loss_grad(m, d).first * d.size();
    den += d.size();
  }
  return num / den;
}

/// One global round: every device runs N full-batch descent steps from the
/// shared parameters, and the server averages the results (unweighted by
/// default).
inline ModelParams federated_round(const ModelParams& global, const Dataset& ds, double eta,
                                   int local_iters, bool weighted = false) {
  ds.validate();
  if (!(eta > 0) || local_iters < 1)
    throw std::invalid_argument("federated_round: eta > 0 and N >= 1 required");
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(global.w.size());
  double den = 0.0;
  for (size_t k = 0; k < ds.devices.size(); ++k) {
    ModelParams local = global;
    for (int j = 0; j < local_iters; ++j)
      local.w -= eta * device_loss_grad(local, ds.devices[k]).second;
    if (!local.w.allFinite())
      throw std::runtime_error("federated_round: device " + std::to_string(k) + " diverged");
    double wk = weighted ? double(ds.devices[k].size()) : 1.0;
    avg += wk * local.w;
    den += wk;
  }
  return {avg / den};
}

inline TrainingTrajectory run_training(const Dataset& ds, double eta, int global_iters,
                                       int local_iters, const ModelParams& w0,
                                       bool weighted = false) {
  TrainingTrajectory tr;
  tr.eta = eta;
  tr.global_iters = global_iters;
  tr.local_iters = local_iters;
  tr.params.push_back(w0);
  tr.losses.push_back(global_loss(w0, ds));
  ModelParams w = w0;
  for (int i = 0; i < global_iters; ++i) {
    w = federated_round(w, ds, eta, local_iters, weighted);
    tr.params.push_back(w);
    tr.losses.push_back(global_loss(w, ds));
  }
  return tr;
}

/// Fixed-seed linear-model data: y = theta^T x + gaussian noise.
inline Dataset make_synthetic_dataset(int num_devices, int samples_per_device, int dim,
                                      double noise_std = 0.1, std::uint32_t seed = 42) {
  if (num_devices < 1 || samples_per_device < 1 || dim < 1)
    throw std::invalid_argument("make_synthetic_dataset: bad sizes");
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd theta(dim);
  for (int i = 0; i < dim; ++i) theta[i] = gauss(rng);
  Dataset ds;
  ds.devices.resize(num_devices);
  for (auto& dev : ds.devices) {
    dev.resize(samples_per_device);
    for (auto& s : dev) {
      s.x.resize(dim);
      for (int i = 0; i < dim; ++i) s.x[i] = gauss(rng);
      s.y = theta.dot(s.x) + noise_std * gauss(rng);
    }
  }
  return ds;
}

inline void write_trajectory_csv(std::ostream& os, const TrainingTrajectory& tr) {
  os << "round,global_loss";
  int dim = tr.params.empty() ? 0 : static_cast<int>(tr.params.front().w.size());
  for (int i = 0; i < dim; ++i) os << ",w" << i;
  os << "\n";
  char buf[64];
  for (size_t r = 0; r < tr.params.size(); ++r) {
    os << r;
    std::snprintf(buf, sizeof buf, ",%.12g", tr.losses[r]);
    os << buf;
    for (int i = 0; i < dim; ++i) {
      std::snprintf(buf, sizeof buf, ",%.12g", tr.params[r].w[i]);
      os << buf;
    }
    os << "\n";
  }
}

}  // namespace fedopt

#endif  // FEDOPT_FEDSIM_HPP
