#ifndef FEDOPT_SCENARIO_HPP
#define FEDOPT_SCENARIO_HPP

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedopt/units.hpp"

namespace fedopt {

/// Per-device compute model. `flops_per_update` already includes the dataset
/// size (FLOPs-per-sample times samples), so `flops_per_update /
/// flops_per_cycle` is the total CPU cycles per local update.
struct DeviceProfile {
  double flops_per_update = 0.0;   // FLOPs per local update
  double flops_per_cycle = 1.0;    // FLOPs executed per CPU cycle
  double capacitance_coeff = 1e-28;  // J*s^2 per cycle^3
  double max_cpu_freq = 1e9;       // cycles/s
  double distance = 0.0;           // m; 0 when a fixed gain is given instead
  std::optional<double> fixed_gain;  // overrides the path-loss model

  double cycles_per_update() const { return flops_per_update / flops_per_cycle; }

  void validate() const {
    if (!(flops_per_update > 0)) throw std::invalid_argument("device: flops_per_update must be > 0");
    if (!(flops_per_cycle > 0)) throw std::invalid_argument("device: flops_per_cycle must be > 0");
    if (!(capacitance_coeff > 0)) throw std::invalid_argument("device: capacitance_coeff must be > 0");
    if (!(max_cpu_freq > 0)) throw std::invalid_argument("device: max_cpu_freq must be > 0");
    if (!fixed_gain && !(distance > 0)) throw std::invalid_argument("device: distance or gain required");
    if (fixed_gain && !(*fixed_gain > 0)) throw std::invalid_argument("device: gain must be > 0");
    double cycles = cycles_per_update();
    if (!std::isfinite(cycles) || !(cycles > 0))
      throw std::invalid_argument("device: cycles per update must be finite and positive");
  }
};

struct ChannelModel {
  double ref_gain = 1e-3;        // linear power ratio at ref_distance (-30 dB)
  double ref_distance = 1.0;     // m
  double pathloss_exponent = 3.0;
  double noise_power = 1e-13;    // W (-100 dBm)
  double bandwidth = 2e6;        // Hz

  void validate() const {
    if (!(ref_gain > 0) || !(ref_distance > 0) || !(noise_power > 0) || !(bandwidth > 0))
      throw std::invalid_argument("channel: all fields must be > 0");
    if (!(pathloss_exponent >= 1)) throw std::invalid_argument("channel: pathloss_exponent must be >= 1");
  }
};

struct TrainingPlan {
  int global_iters = 1;      // M
  int local_iters = 1;       // N
  double upload_bits = 0.0;  // S
  double max_delay = 0.0;    // T, seconds

  void validate() const {
    if (global_iters < 1 || local_iters < 1)
      throw std::invalid_argument("plan: M and N must be >= 1");
    if (!(upload_bits > 0)) throw std::invalid_argument("plan: upload_bits must be > 0");
    if (!(max_delay > 0)) throw std::invalid_argument("plan: max_delay must be > 0");
  }
};

/// Defaults used when a scenario file omits a field. The channel constants
/// follow the usual urban micro setup; the compute-side constants are artifact
/// defaults and are echoed into every result file via fingerprint().
struct ScenarioDefaults {
  double bandwidth = 2e6;
  double noise_power = 1e-13;
  double pathloss_exponent = 3.0;
  double ref_gain = 1e-3;
  double ref_distance = 1.0;
  double capacitance_coeff = 1e-28;
  double flops_per_cycle = 1.0;
  double max_cpu_freq = 1e9;
  double max_power = 0.1;

  std::string fingerprint() const {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "B=%.9g;sigma2=%.9g;alpha0=%.9g;beta0=%.9g;d0=%.9g;"
                  "varsigma=%.9g;C=%.9g;fmax=%.9g;Pmax=%.9g",
                  bandwidth, noise_power, pathloss_exponent, ref_gain,
                  ref_distance, capacitance_coeff, flops_per_cycle,
                  max_cpu_freq, max_power);
    return buf;
  }

  /// Override defaults from a comma-separated key=value list, e.g.
  /// "bandwidth=4e6,max_power=0.2". Values accept unit suffixes.
  void apply_overrides(const std::string& spec) {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      auto eq = item.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("defaults override: expected key=value in '" + item + "'");
      std::string key = item.substr(0, eq);
      double val = parse_quantity(item.substr(eq + 1));
      if (key == "bandwidth") bandwidth = val;
      else if (key == "noise_power") noise_power = val;
      else if (key == "pathloss_exponent") pathloss_exponent = val;
      else if (key == "ref_gain") ref_gain = val;
      else if (key == "ref_distance") ref_distance = val;
      else if (key == "capacitance_coeff") capacitance_coeff = val;
      else if (key == "flops_per_cycle") flops_per_cycle = val;
      else if (key == "max_cpu_freq") max_cpu_freq = val;
      else if (key == "max_power") max_power = val;
      else throw std::invalid_argument("defaults override: unknown key '" + key + "'");
    }
  }

  static ScenarioDefaults from_env() {
    ScenarioDefaults d;
    if (const char* s = std::getenv("FEDOPT_DEFAULTS")) d.apply_overrides(s);
    return d;
  }
};

/// Channel power gain beta0 * (d/d0)^(-alpha0).
inline double path_loss_gain(double distance, const ChannelModel& channel) {
  if (!(distance > 0)) throw std::invalid_argument("path_loss_gain: distance must be > 0");
  return channel.ref_gain * std::pow(distance / channel.ref_distance, -channel.pathloss_exponent);
}

/// Eq-style local update time (F_k/C_k)/f.
inline double local_update_time(const DeviceProfile& device, double cpu_freq) {
  if (!(cpu_freq > 0) || cpu_freq > device.max_cpu_freq * (1 + 1e-12))
    throw std::invalid_argument("local_update_time: cpu_freq out of (0, f_max]");
  return device.cycles_per_update() / cpu_freq;
}

/// Per-update DVFS energy (F_k/C_k) * varsigma * f^2.
inline double local_update_energy(const DeviceProfile& device, double cpu_freq) {
  if (!(cpu_freq > 0) || cpu_freq > device.max_cpu_freq * (1 + 1e-12))
    throw std::invalid_argument("local_update_energy: cpu_freq out of (0, f_max]");
  return device.cycles_per_update() * device.capacitance_coeff * cpu_freq * cpu_freq;
}

struct SystemConfig {
  std::vector<DeviceProfile> devices;
  ChannelModel channel;
  TrainingPlan plan;
  double max_power = 0.1;                // P_max, common cap
  std::vector<double> channel_gains;     // h_k, precomputed at load
  std::string defaults_fingerprint;

  int num_devices() const { return static_cast<int>(devices.size()); }

  void recompute_gains() {
    channel_gains.resize(devices.size());
    for (size_t k = 0; k < devices.size(); ++k)
      channel_gains[k] = devices[k].fixed_gain ? *devices[k].fixed_gain
                                               : path_loss_gain(devices[k].distance, channel);
  }

  void validate() const {
    if (devices.empty()) throw std::invalid_argument("config: at least one device required");
    for (const auto& d : devices) d.validate();
    channel.validate();
    plan.validate();
    if (!(max_power > 0)) throw std::invalid_argument("config: max_power must be > 0");
    if (channel_gains.size() != devices.size())
      throw std::invalid_argument("config: channel_gains not computed");
  }
};

namespace detail {

inline double get_quantity(const nlohmann::json& j, const char* what) {
  if (j.is_string()) return parse_quantity(j.get<std::string>());
  if (j.is_number()) return j.get<double>();
  throw std::invalid_argument(std::string("scenario: ") + what + " must be a number or unit string");
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                           const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) { ok = true; break; }
    if (!ok)
      throw std::invalid_argument(std::string("scenario: unknown key '") + it.key() + "' in " + where);
  }
}

}  // namespace detail

inline SystemConfig load_scenario_json(const nlohmann::json& j,
                                       const ScenarioDefaults& defaults = ScenarioDefaults::from_env()) {
  using detail::get_quantity;
  using detail::reject_unknown;
  if (!j.is_object()) throw std::invalid_argument("scenario: top level must be an object");
  reject_unknown(j, {"devices", "channel", "plan", "max_power"}, "scenario");

  SystemConfig cfg;
  cfg.channel.bandwidth = defaults.bandwidth;
  cfg.channel.noise_power = defaults.noise_power;
  cfg.channel.pathloss_exponent = defaults.pathloss_exponent;
  cfg.channel.ref_gain = defaults.ref_gain;
  cfg.channel.ref_distance = defaults.ref_distance;
  cfg.max_power = defaults.max_power;
  cfg.defaults_fingerprint = defaults.fingerprint();

  if (j.contains("channel")) {
    const auto& c = j["channel"];
    reject_unknown(c, {"bandwidth", "noise_power", "ref_gain", "ref_distance", "pathloss_exponent"},
                   "channel");
    if (c.contains("bandwidth")) cfg.channel.bandwidth = get_quantity(c["bandwidth"], "bandwidth");
    if (c.contains("noise_power")) cfg.channel.noise_power = get_quantity(c["noise_power"], "noise_power");
    if (c.contains("ref_gain")) cfg.channel.ref_gain = get_quantity(c["ref_gain"], "ref_gain");
    if (c.contains("ref_distance")) cfg.channel.ref_distance = get_quantity(c["ref_distance"], "ref_distance");
    if (c.contains("pathloss_exponent"))
      cfg.channel.pathloss_exponent = get_quantity(c["pathloss_exponent"], "pathloss_exponent");
  }

  if (!j.contains("devices") || !j["devices"].is_array() || j["devices"].empty())
    throw std::invalid_argument("scenario: non-empty devices array required");
  for (const auto& d : j["devices"]) {
    reject_unknown(d, {"flops_per_update", "flops_per_cycle", "capacitance_coeff",
                       "max_cpu_freq", "distance", "gain"}, "device");
    DeviceProfile dev;
    dev.flops_per_cycle = defaults.flops_per_cycle;
    dev.capacitance_coeff = defaults.capacitance_coeff;
    dev.max_cpu_freq = defaults.max_cpu_freq;
    if (!d.contains("flops_per_update"))
      throw std::invalid_argument("scenario: device flops_per_update required");
    dev.flops_per_update = get_quantity(d["flops_per_update"], "flops_per_update");
    if (d.contains("flops_per_cycle")) dev.flops_per_cycle = get_quantity(d["flops_per_cycle"], "flops_per_cycle");
    if (d.contains("capacitance_coeff")) dev.capacitance_coeff = get_quantity(d["capacitance_coeff"], "capacitance_coeff");
    if (d.contains("max_cpu_freq")) dev.max_cpu_freq = get_quantity(d["max_cpu_freq"], "max_cpu_freq");
    if (d.contains("gain")) dev.fixed_gain = get_quantity(d["gain"], "gain");
    if (d.contains("distance")) dev.distance = get_quantity(d["distance"], "distance");
    cfg.devices.push_back(dev);
  }

  if (!j.contains("plan")) throw std::invalid_argument("scenario: plan required");
  const auto& p = j["plan"];
  reject_unknown(p, {"M", "N", "upload_bits", "max_delay"}, "plan");
  if (!p.contains("M") || !p.contains("N") || !p.contains("upload_bits") || !p.contains("max_delay"))
    throw std::invalid_argument("scenario: plan needs M, N, upload_bits, max_delay");
  cfg.plan.global_iters = p["M"].get<int>();
  cfg.plan.local_iters = p["N"].get<int>();
  cfg.plan.upload_bits = get_quantity(p["upload_bits"], "upload_bits");
  cfg.plan.max_delay = get_quantity(p["max_delay"], "max_delay");

  if (j.contains("max_power")) cfg.max_power = get_quantity(j["max_power"], "max_power");

  cfg.recompute_gains();
  cfg.validate();
  return cfg;
}

inline SystemConfig load_scenario_file(const std::string& path,
                                       const ScenarioDefaults& defaults = ScenarioDefaults::from_env()) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return load_scenario_json(j, defaults);
}

/// Serializes with plain SI numbers; load(serialize(cfg)) reproduces cfg.
inline nlohmann::json serialize_scenario(const SystemConfig& cfg) {
  nlohmann::json j;
  for (const auto& d : cfg.devices) {
    nlohmann::json dj;
    dj["flops_per_update"] = d.flops_per_update;
    dj["flops_per_cycle"] = d.flops_per_cycle;
    dj["capacitance_coeff"] = d.capacitance_coeff;
    dj["max_cpu_freq"] = d.max_cpu_freq;
    if (d.fixed_gain) dj["gain"] = *d.fixed_gain;
    else dj["distance"] = d.distance;
    j["devices"].push_back(dj);
  }
  j["channel"] = {{"bandwidth", cfg.channel.bandwidth},
                  {"noise_power", cfg.channel.noise_power},
                  {"ref_gain", cfg.channel.ref_gain},
                  {"ref_distance", cfg.channel.ref_distance},
                  {"pathloss_exponent", cfg.channel.pathloss_exponent}};
  j["plan"] = {{"M", cfg.plan.global_iters},
               {"N", cfg.plan.local_iters},
               {"upload_bits", cfg.plan.upload_bits},
               {"max_delay", cfg.plan.max_delay}};
  j["max_power"] = cfg.max_power;
  return j;
}

}  // namespace fedopt

#endif  // FEDOPT_SCENARIO_HPP
