#ifndef FEDOPT_UNITS_HPP
#define FEDOPT_UNITS_HPP

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fedopt {

/// dBm -> watts. 0 dBm == 1 mW.
inline double dbm_to_watts(double level_dbm) {
  return std::pow(10.0, level_dbm / 10.0) * 1e-3;
}

/// dB -> linear power ratio.
inline double db_to_linear(double level_db) {
  return std::pow(10.0, level_db / 10.0);
}

/// Parses a scalar quantity that is either a plain number (already SI) or a
/// "value unit" string such as "2 MHz", "-100 dBm", "4.9 Gbit", "1 GHz".
/// dB/dBm suffixes convert to linear ratio / watts respectively.
inline double parse_quantity(const std::string& text) {
  const char* p = text.c_str();
  char* end = nullptr;
  double value = std::strtod(p, &end);
  if (end == p) throw std::invalid_argument("quantity: no number in '" + text + "'");
  std::string unit(end);
  // trim whitespace
  size_t b = unit.find_first_not_of(" \t");
  size_t e = unit.find_last_not_of(" \t");
  unit = (b == std::string::npos) ? "" : unit.substr(b, e - b + 1);
  if (unit.empty()) return value;

  if (unit == "dBm") return dbm_to_watts(value);
  if (unit == "dB") return db_to_linear(value);

  struct Suffix { const char* name; double scale; };
  static const Suffix table[] = {
      {"Hz", 1.0},    {"kHz", 1e3},   {"MHz", 1e6},   {"GHz", 1e9},
      {"W", 1.0},     {"mW", 1e-3},   {"uW", 1e-6},
      {"bit", 1.0},   {"bits", 1.0},  {"kbit", 1e3},  {"Mbit", 1e6},
      {"Gbit", 1e9},
      {"s", 1.0},     {"ms", 1e-3},   {"us", 1e-6},
      {"m", 1.0},     {"km", 1e3},
      {"FLOP", 1.0},  {"FLOPs", 1.0}, {"kFLOP", 1e3}, {"MFLOP", 1e6},
      {"GFLOP", 1e9},
      {"J", 1.0},     {"mJ", 1e-3},
  };
  for (const auto& s : table)
    if (unit == s.name) return value * s.scale;
  throw std::invalid_argument("quantity: unknown unit '" + unit + "' in '" + text + "'");
}

}  // namespace fedopt

#endif  // FEDOPT_UNITS_HPP
