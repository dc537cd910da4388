#ifndef FEDOPT_NOMA_REGION_HPP
#define FEDOPT_NOMA_REGION_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fedopt/scenario.hpp"

namespace fedopt {

/// Successive decoding order: perm[i] is the device index at position i+1.
/// Position K (perm.back()) is decoded first, position 1 (perm.front()) last,
/// so earlier positions see less residual interference.
struct DecodingOrder {
  std::vector<int> perm;

  void validate(int K) const {
    if (static_cast<int>(perm.size()) != K)
      throw std::invalid_argument("decoding order: size mismatch");
    std::vector<bool> seen(K, false);
    for (int k : perm) {
      if (k < 0 || k >= K || seen[k]) throw std::invalid_argument("decoding order: not a permutation");
      seen[k] = true;
    }
  }

  static DecodingOrder identity(int K) {
    DecodingOrder o;
    o.perm.resize(K);
    std::iota(o.perm.begin(), o.perm.end(), 0);
    return o;
  }
};

/// Bits s, communication energies e and a common upload window t_up (the
/// perspective-variable form of a rate allocation).
struct BitAllocation {
  std::vector<double> bits;      // s_k
  std::vector<double> energies;  // e_k
  double t_up = 0.0;
};

inline constexpr int kMaxExhaustiveDevices = 20;

/// MMSE-SIC corner rates for a given decoding order (bits/second per device).
inline std::vector<double> sic_corner_rates(const std::vector<double>& powers,
                                            const std::vector<double>& gains, double noise,
                                            double bandwidth, const DecodingOrder& order) {
  const int K = static_cast<int>(powers.size());
  if (static_cast<int>(gains.size()) != K)
    throw std::invalid_argument("sic_corner_rates: dimension mismatch");
  order.validate(K);
  if (!(noise > 0) || !(bandwidth > 0))
    throw std::invalid_argument("sic_corner_rates: noise and bandwidth must be > 0");
  std::vector<double> rates(K, 0.0);
  double prefix = 0.0;  // sum of p*h over positions 1..k
  for (int k = 0; k < K; ++k) {
    int dev = order.perm[k];
    if (powers[dev] < 0 || !(gains[dev] > 0))
      throw std::invalid_argument("sic_corner_rates: powers >= 0 and gains > 0 required");
    double next = prefix + powers[dev] * gains[dev];
    rates[dev] = bandwidth * std::log2((noise + next) / (noise + prefix));
    prefix = next;
  }
  return rates;
}

/// Exhaustive polymatroid membership: r in R(p) iff every nonempty subset's
/// rate sum stays below the subset capacity.
inline bool region_contains(const std::vector<double>& rates, const std::vector<double>& powers,
                            const std::vector<double>& gains, double noise, double bandwidth,
                            double tol_abs = -1.0) {
  const int K = static_cast<int>(rates.size());
  if (static_cast<int>(powers.size()) != K || static_cast<int>(gains.size()) != K)
    throw std::invalid_argument("region_contains: dimension mismatch");
  if (K > kMaxExhaustiveDevices)
    throw std::invalid_argument("region_contains: exhaustive check refused for K > 20");
  if (tol_abs < 0) tol_abs = 1e-9 * bandwidth;
  for (int k = 0; k < K; ++k)
    if (rates[k] < -tol_abs) return false;
  for (unsigned mask = 1; mask < (1u << K); ++mask) {
    double rate_sum = 0.0, ph = 0.0;
    for (int k = 0; k < K; ++k)
      if (mask & (1u << k)) { rate_sum += rates[k]; ph += powers[k] * gains[k]; }
    if (rate_sum > bandwidth * std::log2(1.0 + ph / noise) + tol_abs) return false;
  }
  return true;
}

/// Bit-domain membership test of s in C(e, t_up) (perspective form).
inline bool bit_region_contains(const BitAllocation& alloc, const std::vector<double>& gains,
                                double noise, double bandwidth, double tol_abs = -1.0) {
  const int K = static_cast<int>(alloc.bits.size());
  if (static_cast<int>(alloc.energies.size()) != K || static_cast<int>(gains.size()) != K)
    throw std::invalid_argument("bit_region_contains: dimension mismatch");
  if (K > kMaxExhaustiveDevices)
    throw std::invalid_argument("bit_region_contains: exhaustive check refused for K > 20");
  if (!(alloc.t_up > 0)) throw std::invalid_argument("bit_region_contains: t_up must be > 0");
  if (tol_abs < 0) tol_abs = 1e-9 * bandwidth * alloc.t_up;
  for (int k = 0; k < K; ++k)
    if (alloc.bits[k] < -tol_abs) return false;
  for (unsigned mask = 1; mask < (1u << K); ++mask) {
    double bit_sum = 0.0, eh = 0.0;
    for (int k = 0; k < K; ++k)
      if (mask & (1u << k)) { bit_sum += alloc.bits[k]; eh += alloc.energies[k] * gains[k]; }
    double cap = bandwidth * std::log2(1.0 + eh / (alloc.t_up * noise)) * alloc.t_up;
    if (bit_sum > cap + tol_abs) return false;
  }
  return true;
}

/// Greedy corner maximizing sum lambda_k s_k over the bit region: the
/// decoding positions follow descending weights (ties broken by ascending
/// device index) and the bits are the SIC corner of that order.
inline std::pair<std::vector<double>, DecodingOrder> weighted_corner_bits(
    const std::vector<double>& weights, const std::vector<double>& energies, double t_up,
    const std::vector<double>& gains, double noise, double bandwidth) {
  const int K = static_cast<int>(weights.size());
  if (static_cast<int>(energies.size()) != K || static_cast<int>(gains.size()) != K)
    throw std::invalid_argument("weighted_corner_bits: dimension mismatch");
  if (!(t_up > 0)) throw std::invalid_argument("weighted_corner_bits: t_up must be > 0");
  for (double w : weights)
    if (w < 0) throw std::invalid_argument("weighted_corner_bits: weights must be >= 0");

  DecodingOrder order = DecodingOrder::identity(K);
  std::stable_sort(order.perm.begin(), order.perm.end(),
                   [&](int a, int b) { return weights[a] > weights[b]; });

  std::vector<double> bits(K, 0.0);
  double prefix = 0.0;
  for (int k = 0; k < K; ++k) {
    int dev = order.perm[k];
    double next = prefix + energies[dev] * gains[dev];
    bits[dev] = bandwidth * std::log2((noise + next / t_up) / (noise + prefix / t_up)) * t_up;
    prefix = next;
  }
  return {bits, order};
}

/// Max-min common rate with all devices at full power: the bottleneck over
/// all nonempty subsets of subset-capacity / subset-size.
inline double max_common_rate(const std::vector<double>& gains, double max_power, double noise,
                              double bandwidth) {
  const int K = static_cast<int>(gains.size());
  if (K < 1) throw std::invalid_argument("max_common_rate: K >= 1 required");
  if (K > kMaxExhaustiveDevices)
    throw std::invalid_argument("max_common_rate: exhaustive check refused for K > 20");
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << K); ++mask) {
    double ph = 0.0;
    int m = 0;
    for (int k = 0; k < K; ++k)
      if (mask & (1u << k)) { ph += max_power * gains[k]; ++m; }
    best = std::min(best, bandwidth * std::log2(1.0 + ph / noise) / m);
  }
  return best;
}

inline double max_common_rate(const SystemConfig& config) {
  return max_common_rate(config.channel_gains, config.max_power, config.channel.noise_power,
                         config.channel.bandwidth);
}

}  // namespace fedopt

#endif  // FEDOPT_NOMA_REGION_HPP
