#pragma once
// Independent reference evaluations used to freeze expected values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline double q_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Two-slope log-distance loss written out directly from its parameters.
inline double pathloss_db(double a, double b, double c, double f_ref, double bp, double a_after,
                          double f_ghz, double d) {
  d = std::max(d, 1.0);
  const double near = a * std::log10(std::min(d, bp)) + b;
  const double far = d > bp ? a_after * (std::log10(d) - std::log10(bp)) : 0.0;
  return near + far + c * std::log10(f_ghz / f_ref);
}

// Per-module operation counts collapsed by hand: I = 6N1 + 3N1R, II = 5N1 + 3N1R,
// III = 5R, IV = 4R + 19R(N1+N2), V = 1 + 5R.
struct Cycles {
  std::int64_t m1, m2, m3, m4, m5;
};
inline Cycles module_cycles(std::int64_t r, std::int64_t n1, std::int64_t n2) {
  return {6 * n1 + 3 * n1 * r, 5 * n1 + 3 * n1 * r, 5 * r, 4 * r + 19 * r * (n1 + n2), 1 + 5 * r};
}

// Per-second total with N1 executions of module I per T_meas.
inline double cycles_per_second(std::int64_t r, std::int64_t n1, std::int64_t n2, double t_meas,
                                double t_update) {
  const auto c = module_cycles(r, n1, n2);
  return static_cast<double>(c.m1) * static_cast<double>(n1) / t_meas +
         static_cast<double>(c.m2) / t_meas +
         static_cast<double>(c.m3 + c.m4 + c.m5) / t_update;
}

// Bits of one CIS row set: (4 + 4 + 4 bytes + one byte per RAT) per row.
inline std::int64_t cis_bits(std::int64_t r, std::int64_t rows) { return (96 + 8 * r) * rows; }

}  // namespace oracle
