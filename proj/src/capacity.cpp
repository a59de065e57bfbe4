#include "hetv2v/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "hetv2v/error.hpp"

namespace hetv2v {

std::string to_string(McsMode mode) {
  return mode == McsMode::highest ? "highest" : "qpsk_half";
}

McsMode parse_mcs_mode(const std::string& text) {
  if (text == "highest") return McsMode::highest;
  if (text == "qpsk_half") return McsMode::qpsk_half;
  throw ConfigError("unknown mcs_mode '" + text + "' (expected highest|qpsk_half)");
}

TrafficAssumption traffic_for(const RatProfile& profile, double app_rate_bps, McsMode mode,
                              std::size_t payload_bytes, double cbr_max) {
  if (payload_bytes == 0) throw ConfigError("payload must be positive");
  const double rate = mode == McsMode::highest ? profile.data_rate_mbps : profile.qpsk_half_rate_mbps;
  TrafficAssumption t;
  t.packets_per_second = app_rate_bps / (8.0 * static_cast<double>(payload_bytes));
  t.packet_airtime_s = packet_airtime(profile, payload_bytes, rate);
  t.cbr_max = cbr_max;
  return t;
}

double cbr_at_point(std::span<const Transmitter> transmitters, double x_m, const PsrCurve& psr) {
  double load = 0.0;
  for (const auto& tx : transmitters) {
    load += tx.packets_per_second * tx.airtime_s * psr.at(std::abs(tx.position_m - x_m));
  }
  return std::clamp(load, 0.0, 1.0);
}

double psr_footprint_m(const PsrCurve& psr) {
  return 2.0 * psr.step_m * std::accumulate(psr.values.begin(), psr.values.end(), 0.0);
}

double cbr_uniform_unclamped(const TrafficAssumption& traffic, const PsrCurve& psr) {
  return traffic.packets_per_second * traffic.packet_airtime_s * traffic.density_veh_per_m *
         psr_footprint_m(psr);
}

double cbr_uniform(const TrafficAssumption& traffic, const PsrCurve& psr) {
  return std::clamp(cbr_uniform_unclamped(traffic, psr), 0.0, 1.0);
}

double max_density_single(const RatProfile& profile, const PsrCurve& psr,
                          const TrafficAssumption& traffic) {
  const double denom = traffic.packets_per_second * traffic.packet_airtime_s * psr_footprint_m(psr);
  if (!(denom > 0.0)) {
    throw DomainError("max_density_single: zero offered load or sensing footprint for '" +
                      profile.name + "'");
  }
  return traffic.cbr_max / denom * 1000.0;
}

double max_density_hetero(const Catalog& catalog, std::span<const PsrCurve> psr_set,
                          std::span<const TrafficAssumption> traffic) {
  if (catalog.empty()) throw DomainError("max_density_hetero: empty catalog");
  if (psr_set.size() != catalog.size() || traffic.size() != catalog.size()) {
    throw DomainError("max_density_hetero: per-RAT inputs do not match the catalog");
  }
  double total = 0.0;
  for (std::size_t r = 0; r < catalog.size(); ++r) {
    total += max_density_single(catalog[r], psr_set[r], traffic[r]);
  }
  return total;
}

double max_density_hetero(const Catalog& catalog, std::span<const PsrCurve> psr_set,
                          double app_rate_bps, McsMode mode, double cbr_max) {
  std::vector<TrafficAssumption> traffic;
  traffic.reserve(catalog.size());
  for (const auto& p : catalog) traffic.push_back(traffic_for(p, app_rate_bps, mode, 1024, cbr_max));
  return max_density_hetero(catalog, psr_set, traffic);
}

std::vector<CapacityRow> capacity_sweep(const Catalog& catalog, std::span<const PsrCurve> psr_set,
                                        std::span<const CapacityPoint> sweep, double cbr_max,
                                        std::size_t payload_bytes) {
  std::vector<CapacityRow> rows;
  for (const auto& point : sweep) {
    const double rate_bps = point.rate_mbps * 1e6;
    double hetero = 0.0;
    for (std::size_t r = 0; r < catalog.size(); ++r) {
      const auto traffic = traffic_for(catalog[r], rate_bps, point.mode, payload_bytes, cbr_max);
      const double beta = max_density_single(catalog[r], psr_set[r], traffic);
      hetero += beta;
      rows.push_back({point.rate_mbps, point.mode, catalog[r].name, beta});
    }
    rows.push_back({point.rate_mbps, point.mode, "hetero", hetero});
  }
  return rows;
}

void write_capacity_csv(std::ostream& out, std::span<const CapacityRow> rows) {
  out << "rate_mbps,mcs_mode,rat_or_hetero,max_density_veh_per_km\n";
  for (const auto& row : rows) {
    out << row.rate_mbps << ',' << to_string(row.mode) << ',' << row.rat_or_hetero << ','
        << row.max_density_veh_per_km << '\n';
  }
}

}  // namespace hetv2v
