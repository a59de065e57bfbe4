#include "hetv2v/sim/medium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

#include "hetv2v/error.hpp"

namespace hetv2v {

RadioMedium::RadioMedium(Catalog catalog, PathlossParams params, MacParams mac, std::size_t n_nodes,
                         double ring_length_m, PositionFn positions, EventQueue& queue, Rng& rng,
                         MediumListener& listener, double report_radius_m)
    : catalog_(std::move(catalog)),
      params_(params),
      mac_(mac),
      metric_{ring_length_m},
      position_fn_(std::move(positions)),
      queue_(queue),
      rng_(rng),
      listener_(listener),
      report_radius_m_(report_radius_m),
      nodes_(n_nodes),
      channels_(n_nodes * catalog_.size()),
      positions_(n_nodes) {
  validate(catalog_);
  validate(params_);
  if (mac_.backoff_slots < 1) throw ConfigError("backoff_slots must be >= 1");
  if (!(mac_.slot_time_s >= 0.0)) throw ConfigError("slot_time_s must be >= 0");

  stats_.frames_per_rat.assign(catalog_.size(), {});
  rat_state_.resize(catalog_.size());
  for (const auto& p : catalog_) {
    auto& rs = rat_state_[static_cast<std::size_t>(p.id)];
    rs.weakest_threshold_dbm = std::min(p.cs_threshold_dbm, p.rx_threshold_dbm);
    rs.cutoff_m = interaction_range_m(p, params_, rs.weakest_threshold_dbm, mac_.tail_sigmas);
    const auto bins = static_cast<std::size_t>(std::ceil(rs.cutoff_m)) + 2;
    rs.cs_exceed.resize(bins);
    rs.rx_exceed.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      const auto d = static_cast<double>(k);
      rs.cs_exceed[k] = exceed_probability(p, params_, p.cs_threshold_dbm, d);
      rs.rx_exceed[k] = exceed_probability(p, params_, p.rx_threshold_dbm, d);
    }
  }
}

void RadioMedium::refresh_positions(double now) {
  if (positions_time_ >= 0.0 && now - positions_time_ < mac_.position_refresh_s) return;
  for (NodeId n = 0; n < nodes_.size(); ++n) positions_[n] = position_fn_(n, now);
  positions_time_ = now;
}

double RadioMedium::airtime(RatId rat, std::size_t payload_bytes) const {
  return packet_airtime(catalog_[static_cast<std::size_t>(rat)], payload_bytes);
}

void RadioMedium::set_tx_rat(NodeId node, RatId rat, double now) {
  if (rat < 0 || static_cast<std::size_t>(rat) >= catalog_.size()) {
    throw ConfigError("set_tx_rat: unknown RAT " + std::to_string(rat));
  }
  auto& n = nodes_[node];
  n.tx_rat = rat;
  if (n.waiting_rat >= 0 && n.waiting_rat != rat) {
    n.waiting_rat = -1;
    kick(node, now);
  }
}

bool RadioMedium::enqueue(NodeId node, FrameRequest request, double now) {
  auto& n = nodes_[node];
  if (request.kind == FrameKind::data && n.queued_data >= mac_.queue_limit) {
    ++stats_.drops;
    listener_.on_drop(node, request, now);
    return false;
  }
  if (request.kind == FrameKind::data) ++n.queued_data;
  n.queue.push_back(request);
  kick(node, now);
  return true;
}

bool RadioMedium::has_queued(NodeId node, FrameKind kind) const {
  const auto& q = nodes_[node].queue;
  return std::any_of(q.begin(), q.end(), [kind](const FrameRequest& r) { return r.kind == kind; });
}

bool RadioMedium::busy(NodeId node, RatId rat) const { return channel(node, rat).busy_count > 0; }

double RadioMedium::busy_time(NodeId node, RatId rat, double now) const {
  const auto& ch = channel(node, rat);
  return ch.busy_accum + (ch.busy_count > 0 ? now - ch.busy_since : 0.0);
}

void RadioMedium::kick(NodeId node, double now) {
  auto& n = nodes_[node];
  if (n.transmitting || n.attempt_pending || n.waiting_rat >= 0 || n.queue.empty()) return;
  if (busy(node, n.tx_rat)) {
    n.waiting_rat = n.tx_rat;
    return;
  }
  schedule_attempt(node, now);
}

void RadioMedium::schedule_attempt(NodeId node, double now) {
  std::uniform_int_distribution<int> slots(0, mac_.backoff_slots - 1);
  const double delay = static_cast<double>(slots(rng_)) * mac_.slot_time_s;
  nodes_[node].attempt_pending = true;
  queue_.push(now + delay, EventType::mac_attempt, node);
}

void RadioMedium::on_attempt(NodeId node, double now) {
  auto& n = nodes_[node];
  n.attempt_pending = false;
  if (n.transmitting || n.queue.empty()) return;
  if (busy(node, n.tx_rat)) {
    n.waiting_rat = n.tx_rat;
    return;
  }
  start_tx(node, now);
}

void RadioMedium::busy_up(NodeId node, RatId rat, double now) {
  auto& ch = channel(node, rat);
  if (ch.busy_count++ == 0) ch.busy_since = now;
}

void RadioMedium::busy_down(NodeId node, RatId rat, double now) {
  auto& ch = channel(node, rat);
  if (--ch.busy_count == 0) {
    ch.busy_accum += now - ch.busy_since;
    auto& n = nodes_[node];
    if (n.waiting_rat == rat) {
      n.waiting_rat = -1;
      schedule_attempt(node, now);
    }
  }
}

void RadioMedium::add_reception(NodeId node, RatId rat, std::uint32_t slot, double power_dbm) {
  auto& ch = channel(node, rat);
  const auto& n = nodes_[node];
  Reception rec{slot, power_dbm, n.transmitting && n.tx_rat == rat};
  for (auto& other : ch.receptions) {
    if (mac_.capture_margin_db) {
      const double margin = *mac_.capture_margin_db;
      if (other.power_dbm - power_dbm < margin) other.corrupted = true;
      if (power_dbm - other.power_dbm < margin) rec.corrupted = true;
    } else {
      other.corrupted = true;
      rec.corrupted = true;
    }
  }
  ch.receptions.push_back(rec);
}

bool RadioMedium::take_reception(NodeId node, RatId rat, std::uint32_t slot) {
  auto& recs = channel(node, rat).receptions;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (recs[i].slot == slot) {
      const bool ok = !recs[i].corrupted;
      recs[i] = recs.back();
      recs.pop_back();
      return ok;
    }
  }
  return false;
}

void RadioMedium::start_tx(NodeId node, double now) {
  auto& n = nodes_[node];
  FrameRequest request = n.queue.front();
  n.queue.pop_front();
  if (request.kind == FrameKind::data) --n.queued_data;
  const RatId rat = n.tx_rat;
  listener_.on_tx_start(node, rat, request, now);

  std::uint32_t slot;
  if (free_slots_.empty()) {
    slot = static_cast<std::uint32_t>(frames_.size());
    frames_.emplace_back();
  } else {
    slot = free_slots_.back();
    free_slots_.pop_back();
  }
  Frame& frame = frames_[slot];
  frame.tx = node;
  frame.rat = rat;
  frame.request = request;
  frame.start_s = now;
  frame.airtime_s = airtime(rat, request.payload_bytes);
  frame.links.clear();
  ++stats_.frames_per_rat[static_cast<std::size_t>(rat)][static_cast<std::size_t>(request.kind)];

  n.transmitting = true;
  busy_up(node, rat, now);
  for (auto& rec : channel(node, rat).receptions) rec.corrupted = true;  // half duplex

  refresh_positions(now);
  const auto& profile = catalog_[static_cast<std::size_t>(rat)];
  const auto& rs = rat_state_[static_cast<std::size_t>(rat)];
  const double sigma = params_.shadowing_sigma_db;
  const double reach = std::max(rs.cutoff_m, report_radius_m_);
  const Vec2 origin = positions_[node];
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  for (NodeId v = 0; v < nodes_.size(); ++v) {
    if (v == node) continue;
    const double d = metric_(origin, positions_[v]);
    if (d > reach) continue;
    ++stats_.link_evaluations;
    LinkOutcome link{v, static_cast<float>(d), false, false, false};
    if (d <= rs.cutoff_m) {
      const auto bin = static_cast<std::size_t>(d);
      // u is the upper-tail probability of this link's shadowing sample:
      // power >= threshold exactly when u <= P(power >= threshold).
      const double u = sigma > 0.0 ? std::max(uniform(rng_), 1e-300) : 0.0;
      double power = std::numeric_limits<double>::quiet_NaN();
      auto sample_power = [&] {
        if (std::isnan(power)) {
          const double shadow =
              sigma > 0.0 ? sigma * std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u) : 0.0;
          power = mean_rx_power_dbm(profile, params_, d) + shadow;
        }
        return power;
      };
      auto exceeds = [&](const std::vector<double>& table, double threshold) {
        if (sigma > 0.0) {
          if (u > table[bin]) return false;
          if (u <= table[bin + 1]) return true;
        }
        return sample_power() >= threshold;
      };
      link.sensed = exceeds(rs.cs_exceed, profile.cs_threshold_dbm);
      link.strong = exceeds(rs.rx_exceed, profile.rx_threshold_dbm);
      if (link.sensed) busy_up(v, rat, now);
      if (link.strong) {
        add_reception(v, rat, slot, mac_.capture_margin_db ? sample_power() : 0.0);
      }
    }
    if (link.sensed || link.strong || d <= report_radius_m_) frame.links.push_back(link);
  }
  queue_.push(now + frame.airtime_s, EventType::tx_end, node, slot);
}

void RadioMedium::finish_tx(std::uint32_t slot, double now) {
  Frame& frame = frames_[slot];
  const RatId rat = frame.rat;
  for (auto& link : frame.links) {
    if (link.strong) link.delivered = take_reception(link.node, rat, slot);
    if (link.sensed) busy_down(link.node, rat, now);
  }
  auto& n = nodes_[frame.tx];
  n.transmitting = false;
  busy_down(frame.tx, rat, now);
  listener_.on_tx_end(frame, now);
  free_slots_.push_back(slot);
  kick(frame.tx, now);
}

void RadioMedium::handle(const Event& event) {
  switch (event.type) {
    case EventType::mac_attempt:
      on_attempt(event.a, event.time);
      break;
    case EventType::tx_end:
      finish_tx(event.b, event.time);
      break;
    default:
      break;
  }
}

}  // namespace hetv2v
