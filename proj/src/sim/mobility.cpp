#include "hetv2v/sim/mobility.hpp"

#include <cmath>
#include <random>

#include "hetv2v/error.hpp"

namespace hetv2v {

Mobility::Mobility(MobilityConfig config, std::vector<VehicleMotion> vehicles)
    : config_(config), vehicles_(std::move(vehicles)) {}

Vec2 Mobility::position(std::size_t id, double t) const {
  const auto& v = vehicles_[id];
  double x = std::fmod(v.x0_m + v.direction * v.speed_mps * t, config_.road_length_m);
  if (x < 0.0) x += config_.road_length_m;
  return {x, v.lane * config_.lane_width_m};
}

Mobility generate_mobility(const MobilityConfig& config, std::uint64_t seed) {
  if (!(config.road_length_m > 0.0)) throw ConfigError("road_length must be > 0");
  if (config.lanes < 1) throw ConfigError("lanes must be >= 1");
  if (!(config.density_veh_per_km >= 0.0)) throw ConfigError("density must be >= 0");
  if (!(config.max_speed_kmh > 0.0)) throw ConfigError("max_speed must be > 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double per_lane_exact = config.density_veh_per_km * config.road_length_m / 1000.0 / config.lanes;
  const auto per_lane = static_cast<std::size_t>(std::llround(per_lane_exact));
  const double spacing = per_lane > 0 ? config.road_length_m / static_cast<double>(per_lane) : 0.0;
  const double vmax = config.max_speed_kmh / 3.6;

  std::vector<VehicleMotion> out;
  out.reserve(per_lane * static_cast<std::size_t>(config.lanes));
  for (int lane = 0; lane < config.lanes; ++lane) {
    const double offset = u01(rng) * spacing;
    const int direction = lane < (config.lanes + 1) / 2 ? 1 : -1;
    for (std::size_t k = 0; k < per_lane; ++k) {
      VehicleMotion m;
      m.lane = lane;
      m.direction = direction;
      m.x0_m = offset + static_cast<double>(k) * spacing;
      m.speed_mps = vmax * (0.8 + 0.2 * u01(rng));
      out.push_back(m);
    }
  }
  return Mobility(config, std::move(out));
}

}  // namespace hetv2v
