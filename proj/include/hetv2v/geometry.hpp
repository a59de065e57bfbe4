#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace hetv2v {

/// Planar position in meters: x along the road, y across lanes.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

/// Euclidean distance, optionally on a ring road of the given length (0 = open road).
struct DistanceMetric {
  double ring_length_m = 0.0;

  [[nodiscard]] double along(double a, double b) const {
    double dx = std::abs(a - b);
    if (ring_length_m > 0.0) {
      dx = std::fmod(dx, ring_length_m);
      dx = std::min(dx, ring_length_m - dx);
    }
    return dx;
  }

  [[nodiscard]] double operator()(const Vec2& a, const Vec2& b) const {
    const double dx = along(a.x, b.x);
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
  }
};

/// Fixed-point geographic coordinates as carried on the wire (1e-7 degree units).
struct GeoFixed {
  std::int32_t lat_e7 = 0;
  std::int32_t lon_e7 = 0;
  bool operator==(const GeoFixed&) const = default;
};

/// Local equirectangular projection between planar meters and WGS84 degrees.
struct GeoFrame {
  double origin_lat_deg = 38.27;
  double origin_lon_deg = -0.70;

  [[nodiscard]] GeoFixed to_fixed(const Vec2& p) const;
  [[nodiscard]] Vec2 to_planar(const GeoFixed& g) const;
};

}  // namespace hetv2v
