#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetv2v/carhet/selection.hpp"
#include "hetv2v/link_curves.hpp"
#include "hetv2v/radio_model.hpp"
#include "hetv2v/sim/medium.hpp"
#include "hetv2v/sim/mobility.hpp"

namespace hetv2v {

enum class SchemeKind : std::uint8_t { single_rat, random, carhet };

struct Scheme {
  SchemeKind kind = SchemeKind::carhet;
  RatId rat = 0;  // single_rat only

  [[nodiscard]] std::string to_string() const;
  bool operator==(const Scheme&) const = default;
};

/// Accepts "random", "carhet", "single_rat:<id>" and "single_rat:<name>".
/// Throws ConfigError listing the valid forms.
[[nodiscard]] Scheme parse_scheme(const std::string& text, const Catalog& catalog);

struct AppProfile {
  double fraction = 1.0;
  AppRequirement requirement;
  bool operator==(const AppProfile&) const = default;
};

[[nodiscard]] std::vector<AppProfile> uniform_app_profiles(double rate_bps = 1e6, double distance_m = 40.0,
                                                           double reliability = 0.9);
/// 50% (1.5 Mbps, 40 m), 25% (1.0 Mbps, 80 m), 25% (0.5 Mbps, 120 m), all at P = 0.9.
[[nodiscard]] std::vector<AppProfile> mixed_app_profiles();

struct SimConfig {
  MobilityConfig mobility;
  double sim_time_s = 250.0;
  double warmup_s = 20.0;
  double window_s = 1.0;
  std::uint64_t seed = 1;
  Scheme scheme;
  std::vector<AppProfile> app_profiles = uniform_app_profiles();
  std::size_t payload_bytes = 1024;
  CarhetParams carhet;
  MacParams mac;

  /// Throws ConfigError naming the offending field.
  void validate(const Catalog& catalog) const;
};

/// Static inputs shared by every run.
struct SimEnvironment {
  Catalog catalog;
  PathlossParams pathloss;
  std::vector<PdrCurveFamily> pdr_families;  // indexed by RAT id; needed for carhet only
};

struct RatChange {
  std::uint32_t vehicle = 0;
  double time_s = 0.0;
  RatId from = 0;
  RatId to = 0;
  bool operator==(const RatChange&) const = default;
};

struct SimCounters {
  std::uint64_t events = 0;
  std::uint64_t data_frames = 0;
  std::uint64_t cis_frames = 0;
  std::uint64_t cis_bytes = 0;
  std::uint64_t drops = 0;
  std::uint64_t cis_decode_errors = 0;
  std::uint64_t evaluations = 0;
  std::uint64_t postponements = 0;
  std::uint64_t no_feasible = 0;
  /// Data frames sent on a RAT that failed the sender's latest pre-selection.
  std::uint64_t preselect_violations = 0;
  /// Overlapping own transmissions (must stay 0).
  std::uint64_t concurrent_tx = 0;
  bool operator==(const SimCounters&) const = default;
};

struct MetricsReport {
  std::string scheme;
  double density_veh_per_km = 0.0;
  std::size_t n_vehicles = 0;
  std::size_t n_rat = 0;
  std::size_t n_windows = 0;
  double window_s = 1.0;
  double warmup_s = 0.0;

  std::vector<AppRequirement> vehicle_app;
  /// [vehicle][window][rat] busy fraction.
  std::vector<double> cbr;
  /// [vehicle][window] RAT in use at window start.
  std::vector<RatId> window_rat;
  /// [vehicle][window] mean per-receiver delivery ratio times R; empty when
  /// no receiver was within D.
  std::vector<std::optional<double>> window_throughput_bps;
  /// Per vehicle over the whole measured span.
  std::vector<std::optional<double>> throughput_bps;
  std::vector<RatChange> changes;
  SimCounters counters;

  [[nodiscard]] double cbr_at(std::size_t v, std::size_t w, std::size_t r) const {
    return cbr[(v * n_windows + w) * n_rat + r];
  }
  [[nodiscard]] std::optional<bool> satisfied(std::size_t v) const;
  [[nodiscard]] std::optional<bool> window_satisfied(std::size_t v, std::size_t w) const;

  bool operator==(const MetricsReport&) const;
};

/// Runs one seeded simulation. Throws ConfigError before any event on an
/// invalid configuration.
[[nodiscard]] MetricsReport run_simulation(const SimConfig& config, const SimEnvironment& env);

struct BusyInterval {
  double start_s = 0.0;
  double end_s = 0.0;
};

/// Length of the union of `intervals` inside [window_start, window_start + window], over window.
[[nodiscard]] double measure_cbr(std::span<const BusyInterval> intervals, double window_start_s,
                                 double window_s);

/// One data packet as seen by one receiver that was within D at transmit time.
struct RxRecord {
  std::uint32_t tx = 0;
  std::uint32_t rx = 0;
  double time_s = 0.0;
  bool delivered = false;
};

struct Satisfaction {
  bool has_receivers = false;
  double mean_ratio = 0.0;      // mean over receivers of delivered / sent
  double throughput_bps = 0.0;  // mean_ratio * R
  bool satisfied = false;       // throughput >= P * R
};

/// Evaluates one vehicle over [window_start, window_end).
[[nodiscard]] Satisfaction compute_satisfaction(std::span<const RxRecord> log, std::uint32_t vehicle,
                                                const AppRequirement& app, double window_start_s,
                                                double window_end_s);

/// Successive differences of each vehicle's change times (input sorted by time).
[[nodiscard]] std::vector<std::vector<double>> rat_change_intervals(std::span<const RatChange> changes,
                                                                    std::size_t n_vehicles);

/// Linear-interpolation quantile (type 7). NaN for an empty sample.
[[nodiscard]] double quantile(std::vector<double> sample, double q);

inline constexpr double kSummaryQuantiles[] = {0.05, 0.25, 0.5, 0.75, 0.95};

struct RunSummary {
  std::string scheme;
  double density_veh_per_km = 0.0;
  double percent_satisfied = 0.0;
  std::size_t vehicles_counted = 0;
  /// [rat][quantile] over all (vehicle, window) samples.
  std::vector<std::array<double, 5>> cbr_quantiles;
  double mean_tau_s = 0.0;  // NaN without any pair of changes
  std::size_t tau_samples = 0;
};

[[nodiscard]] RunSummary summarize(const MetricsReport& report);

void write_metrics_csv(std::ostream& out, const MetricsReport& report);
void write_changes_csv(std::ostream& out, const MetricsReport& report);
void write_summary_header(std::ostream& out, std::size_t n_rat);
void write_summary_row(std::ostream& out, const RunSummary& summary);

}  // namespace hetv2v
