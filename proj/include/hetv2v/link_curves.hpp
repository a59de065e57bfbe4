#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hetv2v/radio_model.hpp"
#include "hetv2v/sim/medium.hpp"

namespace hetv2v {

/// PDR versus distance, one curve per channel-load level.
struct PdrCurveFamily {
  RatId rat_id = 0;
  std::vector<double> cbr_levels;   // ascending
  std::vector<double> distances_m;  // ascending
  std::vector<double> values;       // row-major [cbr_level][distance]
  std::vector<std::uint32_t> sample_counts;

  [[nodiscard]] bool empty() const { return cbr_levels.empty() || distances_m.empty(); }
  [[nodiscard]] double& at(std::size_t level, std::size_t dist) {
    return values[level * distances_m.size() + dist];
  }
  [[nodiscard]] double at(std::size_t level, std::size_t dist) const {
    return values[level * distances_m.size() + dist];
  }
  [[nodiscard]] std::uint32_t samples(std::size_t level, std::size_t dist) const {
    return sample_counts[level * distances_m.size() + dist];
  }

  bool operator==(const PdrCurveFamily&) const = default;
};

/// Canonical calibration scene and grid.
struct CalibrationConfig {
  std::vector<double> cbr_levels = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> distances_m;  // empty -> 0..500 step 10
  std::uint32_t trials = 2000;
  std::uint64_t seed = 1;

  double road_length_m = 3000.0;
  double background_density_veh_per_km = 80.0;
  std::size_t payload_bytes = 1024;
  double cbr_tolerance = 0.02;
  /// Probe transmitters spread around the ring; each owns a set of receivers.
  std::size_t probes = 6;
  double probe_rate_hz = 10.0;
  double bisection_duration_s = 2.0;
  double warmup_s = 0.5;
  int max_bisection_steps = 24;
  MacParams mac;

  [[nodiscard]] std::vector<double> distance_grid() const;
};

/// Runs the calibration scene for every (load level, distance) cell.
/// Deterministic given the seed; throws CalibrationError naming the level
/// when the background traffic cannot push the measured CBR up to it.
[[nodiscard]] PdrCurveFamily calibrate_pdr(const RatProfile& profile, const PathlossParams& params,
                                           const CalibrationConfig& config);

/// Outcome of one calibration-scene run at a fixed background packet rate.
struct SceneMeasurement {
  double measured_cbr = 0.0;
  std::vector<std::uint32_t> sent;       // per distance
  std::vector<std::uint32_t> delivered;  // per distance
};

[[nodiscard]] SceneMeasurement run_calibration_scene(const RatProfile& profile,
                                                     const PathlossParams& params,
                                                     const CalibrationConfig& config,
                                                     double background_rate_hz, double duration_s,
                                                     std::uint64_t seed);

/// Bilinear interpolation over (cbr, distance), clamped to the grid edges.
/// Throws UsageError on an empty family.
[[nodiscard]] double pdr_lookup(const PdrCurveFamily& family, double cbr, double distance_m);

/// Weighted pool-adjacent-violators fit, non-increasing.
[[nodiscard]] std::vector<double> isotonic_nonincreasing(const std::vector<double>& y,
                                                         const std::vector<double>& w);

/// Makes the family non-increasing in both distance and load.
void smooth_monotone(PdrCurveFamily& family);

void write_pdr_csv(std::ostream& out, const PdrCurveFamily& family, const std::string& provenance);
/// Throws ConfigError on any malformed or incomplete content.
[[nodiscard]] PdrCurveFamily read_pdr_csv(std::istream& in, std::string* provenance = nullptr);

}  // namespace hetv2v
