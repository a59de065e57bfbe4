#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetv2v/capacity.hpp"
#include "hetv2v/cost_model.hpp"
#include "hetv2v/link_curves.hpp"
#include "hetv2v/radio_model.hpp"
#include "hetv2v/sim/simulator.hpp"

namespace hetv2v {

inline constexpr const char* kToolVersion = "0.1.0";

/// Command-line overrides applied on top of the manifest.
struct CliOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scenario;  // "uniform" | "mixed"
};

struct RunManifest {
  std::string hash;  // FNV-1a 64 of the canonical manifest JSON, hex
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  Catalog catalog = default_catalog();
  PathlossParams pathloss = default_pathloss();

  std::vector<CapacityPoint> capacity_sweep = {{0.5, McsMode::highest}, {1.0, McsMode::highest},
                                               {1.5, McsMode::highest}};
  std::size_t capacity_payload_bytes = 1024;
  double capacity_cbr_max = 0.6;

  CalibrationConfig calibration;

  SimConfig sim;  // template for every grid cell
  std::vector<Scheme> schemes;
  std::vector<double> densities = {40.0, 80.0, 120.0};
  int repetitions = 1;
  std::string scenario = "uniform";

  CostInputs cost;
  std::int64_t cost_n_max = 100;
  std::vector<double> cost_cpu_ghz = {0.5, 1.0, 2.0, 3.0};
};

/// Reads and validates a manifest; an empty path yields the defaults.
/// Throws ConfigError naming the offending field.
[[nodiscard]] RunManifest load_manifest(const std::string& path, const CliOverrides& overrides = {});
/// Relative catalog/pathloss paths resolve against `base_dir`.
[[nodiscard]] RunManifest parse_manifest(const nlohmann::json& j, const CliOverrides& overrides = {},
                                         const std::filesystem::path& base_dir = {});

[[nodiscard]] std::uint64_t fnv1a64(const std::string& bytes);
[[nodiscard]] std::string hex64(std::uint64_t v);

/// "# hetv2v <version> manifest_hash=<hex> seed=<n>"
[[nodiscard]] std::string provenance_header(const RunManifest& m);

void to_json(nlohmann::json& j, const MacParams& p);
void from_json(const nlohmann::json& j, MacParams& p);
void to_json(nlohmann::json& j, const CalibrationConfig& c);
void to_json(nlohmann::json& j, const SimConfig& c);

}  // namespace hetv2v
