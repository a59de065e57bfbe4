#include "hetv2v/cost_model.hpp"

#include <iomanip>
#include <ostream>

#include "hetv2v/error.hpp"

namespace hetv2v {

std::array<ModuleCost, 5> cycles_per_module(const CostInputs& in) {
  const std::int64_t r = in.n_rat;
  const std::int64_t n1 = in.n1;
  const std::int64_t nn = in.n1 + in.n2;
  return {{
      {"I. Context acquisition", 2 * n1 + n1 + n1 + 2 * n1 + 2 * n1 * r + n1 * r,
       static_cast<double>(n1) / in.t_meas_s},
      {"II. Context sharing", 2 * n1 + n1 + 2 * n1 + 2 * n1 * r + n1 * r, 1.0 / in.t_meas_s},
      {"III. RAT pre-selection", 2 * r + 2 * r + r, 1.0 / in.t_update_s},
      {"IV. Cost estimation",
       2 * r + r + r + 2 * r * nn + 11 * r * nn + r * nn + 3 * r * nn + r * nn + r * nn,
       1.0 / in.t_update_s},
      {"V. RAT selection", 1 + 2 * r + r + r + r, 1.0 / in.t_update_s},
  }};
}

double total_cycles_per_second(const CostInputs& in) {
  double total = 0.0;
  for (const auto& m : cycles_per_module(in)) total += m.cycles_per_second();
  return total;
}

double cpu_usage(const CostInputs& in) {
  if (!(in.cpu_hz > 0.0)) throw DomainError("cpu_usage: cpu_hz must be positive");
  return total_cycles_per_second(in) / in.cpu_hz;
}

Overhead overhead_bps(const CostInputs& in) {
  if (!(in.t_meas_s > 0.0)) throw DomainError("overhead_bps: T_meas must be positive");
  const std::int64_t n = in.n1;
  Overhead o;
  o.cis_bits = (in.s_t_bits + in.s_lat_bits + in.s_lon_bits + in.n_rat * in.s_cbr_bits) * (n + 1);
  o.cis_per_second = static_cast<double>(n) / in.t_meas_s;
  o.bits_per_second = o.cis_per_second * static_cast<double>(o.cis_bits);
  o.bits_per_second_per_hz = o.bits_per_second / in.total_bandwidth_hz;
  return o;
}

std::vector<CostRow> cost_sweep(const CostInputs& base, std::int64_t n_max,
                                std::span<const double> cpu_ghz) {
  std::vector<CostRow> rows;
  for (std::int64_t n = 0; n <= n_max; ++n) {
    for (double ghz : cpu_ghz) {
      CostInputs in = base;
      in.n1 = n;
      in.n2 = n;
      in.cpu_hz = ghz * 1e9;
      rows.push_back({n, ghz, total_cycles_per_second(in), cpu_usage(in), overhead_bps(in)});
    }
  }
  return rows;
}

void write_cost_csv(std::ostream& out, std::span<const CostRow> rows) {
  out << "n,cpu_ghz,cycles_per_second,cpu_usage,s_cis_bits,n_cis_per_s,overhead_bps,"
         "overhead_bps_per_hz\n";
  out << std::setprecision(12);
  for (const auto& r : rows) {
    out << r.n << ',' << r.cpu_ghz << ',' << r.cycles_per_second << ',' << r.cpu_usage << ','
        << r.overhead.cis_bits << ',' << r.overhead.cis_per_second << ','
        << r.overhead.bits_per_second << ',' << r.overhead.bits_per_second_per_hz << '\n';
  }
}

}  // namespace hetv2v
