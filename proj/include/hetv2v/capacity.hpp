#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hetv2v/radio_model.hpp"

namespace hetv2v {

/// Homogeneous traffic used by the analytic load bounds.
struct TrafficAssumption {
  double packets_per_second = 0.0;  // n_pkt
  double packet_airtime_s = 0.0;    // t_pkt
  double density_veh_per_m = 0.0;   // beta
  double cbr_max = 0.6;
};

/// A broadcaster on the road axis, for the general (non-uniform) CBR sum.
struct Transmitter {
  double position_m = 0.0;
  double packets_per_second = 0.0;
  double airtime_s = 0.0;
};

enum class McsMode { highest, qpsk_half };

[[nodiscard]] std::string to_string(McsMode mode);
[[nodiscard]] McsMode parse_mcs_mode(const std::string& text);

/// Traffic generated by an application of `app_rate_bps` on `profile`, split into
/// `payload_bytes` packets, at the rate implied by `mode`.
[[nodiscard]] TrafficAssumption traffic_for(const RatProfile& profile, double app_rate_bps,
                                            McsMode mode, std::size_t payload_bytes = 1024,
                                            double cbr_max = 0.6);

/// Sum of n_i * t_i * PSR(|x_i - x|), clamped to [0, 1].
[[nodiscard]] double cbr_at_point(std::span<const Transmitter> transmitters, double x_m,
                                  const PsrCurve& psr);

/// Two-sided sensing footprint in meters: 2 * sum over 1 m bins of PSR.
[[nodiscard]] double psr_footprint_m(const PsrCurve& psr);

[[nodiscard]] double cbr_uniform_unclamped(const TrafficAssumption& traffic, const PsrCurve& psr);
[[nodiscard]] double cbr_uniform(const TrafficAssumption& traffic, const PsrCurve& psr);

/// Largest density (veh/km) keeping the uniform CBR at cbr_max. Throws DomainError
/// when the offered load or the footprint is zero.
[[nodiscard]] double max_density_single(const RatProfile& profile, const PsrCurve& psr,
                                        const TrafficAssumption& traffic);

/// Sum of the per-RAT bounds. `psr_set` and `traffic` are indexed by RAT id.
[[nodiscard]] double max_density_hetero(const Catalog& catalog, std::span<const PsrCurve> psr_set,
                                        std::span<const TrafficAssumption> traffic);

/// Same, with every RAT carrying the same application rate.
[[nodiscard]] double max_density_hetero(const Catalog& catalog, std::span<const PsrCurve> psr_set,
                                        double app_rate_bps, McsMode mode, double cbr_max = 0.6);

struct CapacityPoint {
  double rate_mbps = 0.0;
  McsMode mode = McsMode::highest;
};

struct CapacityRow {
  double rate_mbps = 0.0;
  McsMode mode = McsMode::highest;
  std::string rat_or_hetero;
  double max_density_veh_per_km = 0.0;
};

/// One row per RAT plus one "hetero" row for every sweep point.
[[nodiscard]] std::vector<CapacityRow> capacity_sweep(const Catalog& catalog,
                                                      std::span<const PsrCurve> psr_set,
                                                      std::span<const CapacityPoint> sweep,
                                                      double cbr_max = 0.6,
                                                      std::size_t payload_bytes = 1024);

void write_capacity_csv(std::ostream& out, std::span<const CapacityRow> rows);

}  // namespace hetv2v
