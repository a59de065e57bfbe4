#include "hetv2v/geometry.hpp"

#include <numbers>

namespace hetv2v {

namespace {
constexpr double kEarthRadiusM = 6371000.0;
constexpr double kDegPerRad = 180.0 / std::numbers::pi;
}  // namespace

GeoFixed GeoFrame::to_fixed(const Vec2& p) const {
  const double lat = origin_lat_deg + (p.y / kEarthRadiusM) * kDegPerRad;
  const double lon = origin_lon_deg +
                     (p.x / (kEarthRadiusM * std::cos(origin_lat_deg / kDegPerRad))) * kDegPerRad;
  return {static_cast<std::int32_t>(std::llround(lat * 1e7)),
          static_cast<std::int32_t>(std::llround(lon * 1e7))};
}

Vec2 GeoFrame::to_planar(const GeoFixed& g) const {
  const double lat = static_cast<double>(g.lat_e7) * 1e-7;
  const double lon = static_cast<double>(g.lon_e7) * 1e-7;
  return {(lon - origin_lon_deg) / kDegPerRad * kEarthRadiusM * std::cos(origin_lat_deg / kDegPerRad),
          (lat - origin_lat_deg) / kDegPerRad * kEarthRadiusM};
}

}  // namespace hetv2v
