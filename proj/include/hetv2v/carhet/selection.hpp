#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hetv2v/carhet/context_table.hpp"
#include "hetv2v/geometry.hpp"
#include "hetv2v/link_curves.hpp"
#include "hetv2v/radio_model.hpp"

namespace hetv2v {

struct CarhetParams {
  double t_meas_s = 0.2;
  double t_update_s = 1.0;
  double t_neigh_s = 1.0;
  double alpha = 0.05;
};

/// Application requirement: R bps delivered with probability P up to D meters.
struct AppRequirement {
  double rate_bps = 1e6;
  double distance_m = 40.0;
  double reliability = 0.9;
  bool operator==(const AppRequirement&) const = default;
};

/// RATs whose PDR at the target distance, under the measured load, reaches P.
[[nodiscard]] std::vector<RatId> preselect(const Catalog& catalog,
                                           std::span<const PdrCurveFamily> pdr_families,
                                           std::span<const double> measured_cbr,
                                           double distance_m, double reliability);

/// Worst neighbor load per RAT if this vehicle transmitted on it:
/// max over entries of min(1, LE_ij + n * t_j * PSR_j(d_i)). Non-candidates cost 1.
[[nodiscard]] std::vector<double> estimate_costs(const ContextTable& table,
                                                 std::span<const RatId> candidates,
                                                 std::span<const PsrCurve> psr_set,
                                                 double packets_per_second,
                                                 std::span<const double> airtimes_s,
                                                 const Vec2& own_position,
                                                 const DistanceMetric& metric = {});

/// Cheapest candidate, with hysteresis against the current RAT. A current
/// RAT outside a non-empty candidate set is always abandoned.
[[nodiscard]] RatId select_rat(std::span<const double> costs, std::span<const RatId> candidates,
                               RatId current, double alpha);

/// Uniform on [T_update, T_update * (n_changes + 1)].
[[nodiscard]] double next_trigger_delay(double t_update_s, std::uint32_t n_changes, Rng& rng);

struct SelectionState {
  RatId current_rat = 0;
  std::uint32_t n_changes = 0;
  double next_eval_time_s = 0.0;
  bool postponed = false;
  AppRequirement app;
};

/// Everything an evaluation needs besides the context table.
struct EvaluationInputs {
  const Catalog* catalog = nullptr;
  std::span<const PdrCurveFamily> pdr_families;
  std::span<const PsrCurve> psr_set;
  std::span<const double> measured_cbr;
  std::span<const double> airtimes_s;
  double packets_per_second = 0.0;
  Vec2 own_position;
  DistanceMetric metric;
};

struct TickOutcome {
  bool evaluated = false;
  bool postponed = false;
  bool no_feasible_rat = false;
  std::optional<RatId> changed_from;
  std::optional<RatId> changed_to;
  std::vector<RatId> candidates;
  std::vector<double> costs;
};

/// Per-vehicle RAT selection state machine (proactive trigger, decision sharing).
class SelectionEngine {
 public:
  SelectionEngine(CarhetParams params, SelectionState initial);

  /// A CIS carrying a decision-sharing flag arrived. Values above zero arm
  /// one postponement and a re-broadcast with one hop less.
  void on_flag(std::uint8_t hops_remaining);

  /// Evaluation timer expiry.
  TickOutcome on_timer(double now, const ContextTable& table, const EvaluationInputs& inputs,
                       Rng& rng);

  /// Flag to attach to the next outgoing CIS; clears it.
  [[nodiscard]] std::uint8_t take_outgoing_flag();
  [[nodiscard]] std::uint8_t pending_outgoing_flag() const { return outgoing_flag_; }
  [[nodiscard]] bool postpone_armed() const { return postpone_armed_; }

  [[nodiscard]] const SelectionState& state() const { return state_; }
  [[nodiscard]] const CarhetParams& params() const { return params_; }

 private:
  CarhetParams params_;
  SelectionState state_;
  bool postpone_armed_ = false;
  std::uint8_t outgoing_flag_ = 0;
};

}  // namespace hetv2v
