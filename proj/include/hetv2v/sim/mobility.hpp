#pragma once

#include <cstdint>
#include <vector>

#include "hetv2v/geometry.hpp"

namespace hetv2v {

struct MobilityConfig {
  double road_length_m = 3000.0;
  int lanes = 4;  // first half drive +x, second half -x
  double lane_width_m = 4.0;
  double density_veh_per_km = 80.0;
  double max_speed_kmh = 100.0;
};

struct VehicleMotion {
  int lane = 0;
  int direction = 1;  // +1 or -1
  double x0_m = 0.0;
  double speed_mps = 0.0;
};

/// Constant-speed ring-road traffic. Positions wrap modulo the road length,
/// so the density never changes.
class Mobility {
 public:
  Mobility(MobilityConfig config, std::vector<VehicleMotion> vehicles);

  [[nodiscard]] std::size_t size() const { return vehicles_.size(); }
  [[nodiscard]] const VehicleMotion& motion(std::size_t id) const { return vehicles_[id]; }
  [[nodiscard]] const MobilityConfig& config() const { return config_; }
  [[nodiscard]] Vec2 position(std::size_t id, double t) const;
  [[nodiscard]] DistanceMetric metric() const { return {config_.road_length_m}; }

 private:
  MobilityConfig config_;
  std::vector<VehicleMotion> vehicles_;
};

/// Vehicles evenly spaced on every lane (random offset per lane), each with a
/// speed drawn from U[0.8, 1.0] * max_speed. Throws ConfigError on invalid input.
[[nodiscard]] Mobility generate_mobility(const MobilityConfig& config, std::uint64_t seed);

}  // namespace hetv2v
