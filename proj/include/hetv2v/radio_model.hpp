#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hetv2v {

/// Index of a RAT within its catalog (catalog[i].id == i).
using RatId = int;

/// Physical parameters of one radio access technology.
struct RatProfile {
  RatId id = 0;
  std::string name;
  double carrier_freq_ghz = 0.0;
  double bandwidth_mhz = 0.0;
  double tx_power_dbm = 0.0;
  double noise_floor_dbm = 0.0;
  double rx_threshold_dbm = 0.0;
  double cs_threshold_dbm = 0.0;
  double data_rate_mbps = 0.0;
  double per_packet_overhead_s = 0.0;
  /// Rate of the robust QPSK 1/2 mode. DSRC 5.9 uses the 6 Mbps ETSI default;
  /// the other profiles scale it by bandwidth.
  double qpsk_half_rate_mbps = 0.0;

  bool operator==(const RatProfile&) const = default;
};

using Catalog = std::vector<RatProfile>;

/// Piecewise log-distance pathloss with log-normal shadowing.
///
/// Below the breakpoint: slope_a * log10(d) + intercept_b + freq_scaling_c * log10(f / ref_freq).
/// Above it the slope switches to slope_a_after_breakpoint, continuous at the breakpoint.
struct PathlossParams {
  double slope_a = 22.7;
  double intercept_b = 41.0;
  double freq_scaling_c = 2.7;
  double ref_freq_ghz = 5.0;
  double breakpoint_distance_m = 66.6;
  double slope_a_after_breakpoint = 40.0;
  double shadowing_sigma_db = 3.0;
  double min_distance_m = 1.0;

  bool operator==(const PathlossParams&) const = default;
};

/// Packet sensing ratio tabulated on a regular distance grid starting at min_distance.
struct PsrCurve {
  RatId rat_id = 0;
  double min_distance_m = 1.0;
  double step_m = 1.0;
  std::vector<double> values;

  /// Linear interpolation; clamps below the first bin and past the last bin.
  [[nodiscard]] double at(double distance_m) const;
  [[nodiscard]] double max_distance_m() const;

  bool operator==(const PsrCurve&) const = default;
};

/// The five RATs of the reference heterogeneous vehicle.
[[nodiscard]] Catalog default_catalog();
[[nodiscard]] PathlossParams default_pathloss();

/// Validates profile invariants; throws ConfigError naming the offending field.
void validate(const RatProfile& profile);
/// Also checks that ids are 0..N-1 in catalog order and names are unique.
void validate(const Catalog& catalog);
void validate(const PathlossParams& params);

[[nodiscard]] const RatProfile& find_rat(const Catalog& catalog, RatId id);
[[nodiscard]] std::optional<RatId> find_rat_by_name(const Catalog& catalog, const std::string& name);

/// Time on air of one packet: per_packet_overhead + 8 * payload / rate.
[[nodiscard]] double packet_airtime(const RatProfile& profile, std::size_t payload_bytes,
                                    std::optional<double> rate_override_mbps = std::nullopt);

[[nodiscard]] double mean_pathloss_db(const PathlossParams& params, double freq_ghz, double distance_m);

/// Mean received power at a distance (tx power minus mean pathloss).
[[nodiscard]] double mean_rx_power_dbm(const RatProfile& profile, const PathlossParams& params,
                                       double distance_m);

/// Standard normal upper-tail probability Q(x).
[[nodiscard]] double gaussian_tail(double x);

/// Probability that the shadowed received power clears `threshold_dbm` at a distance.
[[nodiscard]] double exceed_probability(const RatProfile& profile, const PathlossParams& params,
                                        double threshold_dbm, double distance_m);

[[nodiscard]] PsrCurve derive_psr(const RatProfile& profile, const PathlossParams& params,
                                  double max_distance_m = 3000.0, double step_m = 1.0);

/// Smallest distance past which the shadowed power exceeds `threshold_dbm`
/// with probability below Q(tail_sigmas).
[[nodiscard]] double interaction_range_m(const RatProfile& profile, const PathlossParams& params,
                                         double threshold_dbm, double tail_sigmas = 6.0);

void write_psr_csv(std::ostream& out, const PsrCurve& curve);

// JSON (de)serialization. Missing optional keys fall back to defaults.
void to_json(nlohmann::json& j, const RatProfile& p);
void from_json(const nlohmann::json& j, RatProfile& p);
void to_json(nlohmann::json& j, const PathlossParams& p);
void from_json(const nlohmann::json& j, PathlossParams& p);

[[nodiscard]] Catalog load_catalog(const std::string& path);
[[nodiscard]] PathlossParams load_pathloss(const std::string& path);

}  // namespace hetv2v
