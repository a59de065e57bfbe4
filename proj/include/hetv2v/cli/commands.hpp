#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hetv2v/cli/manifest.hpp"

namespace hetv2v {

/// HETV2V_CACHE_DIR, else $XDG_CACHE_HOME/hetv2v, else $HOME/.cache/hetv2v, else ./.hetv2v-cache.
[[nodiscard]] std::filesystem::path cache_dir();

/// Cache key of one RAT's PDR family: profile, pathloss, grid and seed.
[[nodiscard]] std::string pdr_cache_key(const RatProfile& profile, const PathlossParams& pathloss,
                                        const CalibrationConfig& calibration);
[[nodiscard]] std::filesystem::path pdr_cache_path(const std::filesystem::path& dir, const RatProfile& profile,
                                                   const std::string& key);

struct CalibrationReport {
  std::vector<PdrCurveFamily> families;  // indexed by RAT id
  std::size_t cache_hits = 0;
  std::size_t calibrated = 0;
};

/// Loads every family from the cache, calibrating (and caching) missing or
/// corrupted ones. Warnings go to `log`.
[[nodiscard]] CalibrationReport ensure_pdr_families(const RunManifest& m, unsigned jobs, std::ostream& log);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Subcommands. Return the process exit code; ConfigError propagates (exit 2).
int cmd_capacity(const RunManifest& m, std::ostream& log);
int cmd_calibrate(const RunManifest& m, unsigned jobs, std::ostream& log);
int cmd_simulate(const RunManifest& m, unsigned jobs, std::ostream& log);
int cmd_cost(const RunManifest& m, std::ostream& log);

/// Runs `body(i)` for i in [0, n) on up to `jobs` threads. The first
/// exception is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body);

}  // namespace hetv2v
