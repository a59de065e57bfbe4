#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hetv2v {

/// Parameters of the per-vehicle computational and signalling cost bounds.
struct CostInputs {
  std::int64_t n_rat = 5;
  std::int64_t n1 = 0;  // 1-hop neighbors
  std::int64_t n2 = 0;  // 2-hop neighbors
  double t_meas_s = 0.2;
  double t_update_s = 1.0;
  double cpu_hz = 1e9;
  std::int64_t s_t_bits = 32;
  std::int64_t s_lat_bits = 32;
  std::int64_t s_lon_bits = 32;
  std::int64_t s_cbr_bits = 8;
  double total_bandwidth_hz = 66e6;
};

struct ModuleCost {
  std::string module;
  std::int64_t cycles_per_execution = 0;
  double executions_per_second = 0.0;

  [[nodiscard]] double cycles_per_second() const {
    return static_cast<double>(cycles_per_execution) * executions_per_second;
  }
};

/// Upper-bound cycle counts for context acquisition, context sharing,
/// pre-selection, cost estimation and selection, in that order.
[[nodiscard]] std::array<ModuleCost, 5> cycles_per_module(const CostInputs& in);

[[nodiscard]] double total_cycles_per_second(const CostInputs& in);

/// Fraction of the CPU consumed (not a percentage).
[[nodiscard]] double cpu_usage(const CostInputs& in);

struct Overhead {
  std::int64_t cis_bits = 0;        // s_CIS
  double cis_per_second = 0.0;      // N_CIS
  double bits_per_second = 0.0;     // O_v
  double bits_per_second_per_hz = 0.0;
};

/// Worst-case CIS overhead with N = n1 neighbors, each reporting every T_meas
/// and each packet carrying N + 1 rows.
[[nodiscard]] Overhead overhead_bps(const CostInputs& in);

struct CostRow {
  std::int64_t n = 0;
  double cpu_ghz = 0.0;
  double cycles_per_second = 0.0;
  double cpu_usage = 0.0;
  Overhead overhead;
};

/// Sweep with N1 = N2 = N for every (N, cpu) pair.
[[nodiscard]] std::vector<CostRow> cost_sweep(const CostInputs& base, std::int64_t n_max,
                                              std::span<const double> cpu_ghz);

void write_cost_csv(std::ostream& out, std::span<const CostRow> rows);

}  // namespace hetv2v
