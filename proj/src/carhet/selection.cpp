#include "hetv2v/carhet/selection.hpp"

#include <algorithm>

#include "hetv2v/error.hpp"

namespace hetv2v {

std::vector<RatId> preselect(const Catalog& catalog, std::span<const PdrCurveFamily> pdr_families,
                             std::span<const double> measured_cbr, double distance_m,
                             double reliability) {
  if (pdr_families.size() != catalog.size() || measured_cbr.size() != catalog.size()) {
    throw UsageError("preselect: one PDR family and one CBR value per RAT required");
  }
  std::vector<RatId> out;
  for (const auto& p : catalog) {
    const auto j = static_cast<std::size_t>(p.id);
    if (pdr_lookup(pdr_families[j], measured_cbr[j], distance_m) >= reliability) out.push_back(p.id);
  }
  return out;
}

std::vector<double> estimate_costs(const ContextTable& table, std::span<const RatId> candidates,
                                   std::span<const PsrCurve> psr_set, double packets_per_second,
                                   std::span<const double> airtimes_s, const Vec2& own_position,
                                   const DistanceMetric& metric) {
  const std::size_t n_rat = psr_set.size();
  if (airtimes_s.size() != n_rat) throw UsageError("estimate_costs: one airtime per RAT required");
  std::vector<double> cost(n_rat, 1.0);
  std::vector<double> distance;
  distance.reserve(table.size());
  for (const auto& [id, e] : table.entries()) distance.push_back(metric(own_position, e.position));

  for (const RatId j : candidates) {
    const auto r = static_cast<std::size_t>(j);
    if (r >= n_rat) throw UsageError("estimate_costs: candidate RAT out of range");
    const double load = packets_per_second * airtimes_s[r];
    double c = 0.0;
    std::size_t k = 0;
    for (const auto& [id, e] : table.entries()) {
      const double l = std::min(1.0, e.cbr_per_rat[r] + load * psr_set[r].at(distance[k++]));
      c = std::max(c, l);
    }
    cost[r] = c;
  }
  return cost;
}

RatId select_rat(std::span<const double> costs, std::span<const RatId> candidates, RatId current,
                 double alpha) {
  if (candidates.empty()) return current;
  RatId best = candidates.front();
  bool current_is_candidate = false;
  for (const RatId j : candidates) {
    const double c = costs[static_cast<std::size_t>(j)];
    const double cb = costs[static_cast<std::size_t>(best)];
    if (c < cb || (c == cb && j < best)) best = j;
    current_is_candidate = current_is_candidate || j == current;
  }
  if (!current_is_candidate) return best;
  const double margin = costs[static_cast<std::size_t>(current)] - costs[static_cast<std::size_t>(best)];
  return margin > alpha ? best : current;
}

double next_trigger_delay(double t_update_s, std::uint32_t n_changes, Rng& rng) {
  if (!(t_update_s > 0.0)) throw UsageError("next_trigger_delay: T_update must be > 0");
  if (n_changes == 0) return t_update_s;
  std::uniform_real_distribution<double> u(t_update_s, t_update_s * (n_changes + 1.0));
  return u(rng);
}

SelectionEngine::SelectionEngine(CarhetParams params, SelectionState initial)
    : params_(params), state_(std::move(initial)) {
  if (!(params_.t_meas_s > 0.0) || !(params_.t_update_s > 0.0) || !(params_.t_neigh_s > 0.0)) {
    throw ConfigError("CARHet timers must be > 0");
  }
  if (!(params_.alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
}

void SelectionEngine::on_flag(std::uint8_t hops_remaining) {
  if (hops_remaining == 0) return;
  postpone_armed_ = true;
  outgoing_flag_ = std::max<std::uint8_t>(outgoing_flag_, hops_remaining - 1);
}

std::uint8_t SelectionEngine::take_outgoing_flag() {
  const std::uint8_t f = outgoing_flag_;
  outgoing_flag_ = 0;
  return f;
}

TickOutcome SelectionEngine::on_timer(double now, const ContextTable& table,
                                      const EvaluationInputs& inputs, Rng& rng) {
  TickOutcome out;
  if (postpone_armed_) {
    postpone_armed_ = false;
    state_.postponed = true;
    state_.next_eval_time_s = now + params_.t_meas_s;
    out.postponed = true;
    return out;
  }
  state_.postponed = false;
  out.evaluated = true;
  if (inputs.catalog == nullptr) throw UsageError("SelectionEngine: catalog missing");

  out.candidates = preselect(*inputs.catalog, inputs.pdr_families, inputs.measured_cbr,
                             state_.app.distance_m, state_.app.reliability);
  out.costs = estimate_costs(table, out.candidates, inputs.psr_set, inputs.packets_per_second,
                             inputs.airtimes_s, inputs.own_position, inputs.metric);
  RatId next = state_.current_rat;
  if (out.candidates.empty()) {
    out.no_feasible_rat = true;
  } else {
    next = select_rat(out.costs, out.candidates, state_.current_rat, params_.alpha);
  }

  if (next != state_.current_rat) {
    out.changed_from = state_.current_rat;
    out.changed_to = next;
    state_.current_rat = next;
    ++state_.n_changes;
    outgoing_flag_ = kMaxFlagHops;
  } else {
    state_.n_changes = 0;
  }
  state_.next_eval_time_s = now + next_trigger_delay(params_.t_update_s, state_.n_changes, rng);
  return out;
}

}  // namespace hetv2v
