#include "hetv2v/sim/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "hetv2v/carhet/cis_codec.hpp"
#include "hetv2v/carhet/context_table.hpp"
#include "hetv2v/error.hpp"
#include "hetv2v/sim/seeding.hpp"

namespace hetv2v {

std::string Scheme::to_string() const {
  switch (kind) {
    case SchemeKind::single_rat:
      return "single_rat:" + std::to_string(rat);
    case SchemeKind::random:
      return "random";
    case SchemeKind::carhet:
      return "carhet";
  }
  return "?";
}

Scheme parse_scheme(const std::string& text, const Catalog& catalog) {
  if (text == "random") return {SchemeKind::random, 0};
  if (text == "carhet") return {SchemeKind::carhet, 0};
  const std::string prefix = "single_rat:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string arg = text.substr(prefix.size());
    if (const auto id = find_rat_by_name(catalog, arg)) return {SchemeKind::single_rat, *id};
    if (!arg.empty() && std::all_of(arg.begin(), arg.end(), [](unsigned char c) { return std::isdigit(c); })) {
      const int id = std::stoi(arg);
      if (id >= 0 && static_cast<std::size_t>(id) < catalog.size()) return {SchemeKind::single_rat, id};
    }
  }
  throw ConfigError("unknown scheme '" + text +
                    "'; valid schemes: single_rat:<rat id or name>, random, carhet");
}

std::vector<AppProfile> uniform_app_profiles(double rate_bps, double distance_m, double reliability) {
  return {AppProfile{1.0, {rate_bps, distance_m, reliability}}};
}

std::vector<AppProfile> mixed_app_profiles() {
  return {AppProfile{0.50, {1.5e6, 40.0, 0.9}}, AppProfile{0.25, {1.0e6, 80.0, 0.9}},
          AppProfile{0.25, {0.5e6, 120.0, 0.9}}};
}

void SimConfig::validate(const Catalog& catalog) const {
  hetv2v::validate(catalog);
  if (!(mobility.road_length_m > 0.0)) throw ConfigError("road_length_m must be > 0");
  if (mobility.lanes < 1) throw ConfigError("lanes must be >= 1");
  if (!(mobility.lane_width_m >= 0.0)) throw ConfigError("lane_width_m must be >= 0");
  if (!(mobility.density_veh_per_km >= 0.0)) throw ConfigError("density_veh_per_km must be >= 0");
  if (!(mobility.max_speed_kmh > 0.0)) throw ConfigError("max_speed_kmh must be > 0");
  if (!(warmup_s >= 0.0)) throw ConfigError("warmup_s must be >= 0");
  if (!(sim_time_s > warmup_s)) throw ConfigError("sim_time_s must exceed warmup_s");
  if (!(window_s > 0.0)) throw ConfigError("window_s must be > 0");
  if (payload_bytes == 0) throw ConfigError("payload_bytes must be > 0");
  if (app_profiles.empty()) throw ConfigError("app_profiles must not be empty");
  double total = 0.0;
  for (const auto& p : app_profiles) {
    if (!(p.fraction >= 0.0)) throw ConfigError("app_profiles.fraction must be >= 0");
    if (!(p.requirement.rate_bps > 0.0)) throw ConfigError("app_profiles.rate_bps must be > 0");
    if (!(p.requirement.distance_m > 0.0)) throw ConfigError("app_profiles.distance_m must be > 0");
    if (!(p.requirement.reliability > 0.0 && p.requirement.reliability <= 1.0)) {
      throw ConfigError("app_profiles.reliability must lie in (0, 1]");
    }
    total += p.fraction;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("app_profiles fractions must sum to 1");
  if (!(carhet.t_meas_s > 0.0) || !(carhet.t_update_s > 0.0) || !(carhet.t_neigh_s > 0.0)) {
    throw ConfigError("timers t_meas_s, t_update_s and t_neigh_s must be > 0");
  }
  if (!(carhet.alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (scheme.kind == SchemeKind::single_rat && (scheme.rat < 0 || static_cast<std::size_t>(scheme.rat) >= catalog.size())) {
    throw ConfigError("scheme: unknown RAT id " + std::to_string(scheme.rat));
  }
  if (mac.backoff_slots < 1) throw ConfigError("mac.backoff_slots must be >= 1");
  if (mac.queue_limit < 1) throw ConfigError("mac.queue_limit must be >= 1");
}

namespace {

struct RxCounter {
  std::uint32_t sent = 0;
  std::uint32_t delivered = 0;
};
using RxMap = std::unordered_map<std::uint32_t, RxCounter>;

template <typename Map>
Satisfaction satisfaction_from(const Map& per_receiver, const AppRequirement& app) {
  Satisfaction s;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [rx, c] : per_receiver) {
    if (c.sent == 0) continue;
    sum += static_cast<double>(c.delivered) / c.sent;
    ++n;
  }
  if (n == 0) return s;
  s.has_receivers = true;
  s.mean_ratio = sum / static_cast<double>(n);
  s.throughput_bps = s.mean_ratio * app.rate_bps;
  s.satisfied = s.mean_ratio >= app.reliability - 1e-12;
  return s;
}

std::vector<std::size_t> assign_profiles(std::size_t n, const std::vector<AppProfile>& profiles, Rng& rng) {
  std::vector<std::size_t> count(profiles.size());
  std::vector<std::pair<double, std::size_t>> remainder;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const double exact = profiles[i].fraction * static_cast<double>(n);
    count[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    assigned += count[i];
    remainder.emplace_back(exact - static_cast<double>(count[i]), i);
  }
  std::stable_sort(remainder.begin(), remainder.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++count[remainder[k % remainder.size()].second];
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < profiles.size(); ++i) out.insert(out.end(), count[i], i);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

class Simulation : public MediumListener {
 public:
  Simulation(const SimConfig& cfg, const SimEnvironment& env)
      : cfg_(cfg),
        env_(env),
        n_rat_(env.catalog.size()),
        rng_(derive_seed(cfg.seed, {0})),
        mobility_(generate_mobility(cfg.mobility, derive_seed(cfg.seed, {1}))) {
    n_windows_ = static_cast<std::size_t>(std::floor((cfg.sim_time_s - cfg.warmup_s) / cfg.window_s + 1e-9));
    span_end_ = cfg.warmup_s + static_cast<double>(n_windows_) * cfg.window_s;
    const std::size_t n = mobility_.size();

    report_.scheme = cfg.scheme.to_string();
    report_.density_veh_per_km = cfg.mobility.density_veh_per_km;
    report_.n_vehicles = n;
    report_.n_rat = n_rat_;
    report_.n_windows = n_windows_;
    report_.window_s = cfg.window_s;
    report_.warmup_s = cfg.warmup_s;
    if (n == 0) return;

    for (const auto& p : env.catalog) {
      psr_set_.push_back(derive_psr(p, env.pathloss, cfg.mobility.road_length_m / 2.0, 1.0));
      airtime_.push_back(packet_airtime(p, cfg.payload_bytes));
    }
    double report_radius = 0.0;
    for (const auto& p : cfg.app_profiles) report_radius = std::max(report_radius, p.requirement.distance_m);

    medium_.emplace(env.catalog, env.pathloss, cfg.mac, n, cfg.mobility.road_length_m,
                    [this](NodeId id, double t) { return mobility_.position(id, t); }, queue_, rng_,
                    *this, report_radius);

    const auto profile_of = assign_profiles(n, cfg.app_profiles, rng_);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<int> any_rat(0, static_cast<int>(n_rat_) - 1);
    const bool carhet = cfg.scheme.kind == SchemeKind::carhet;
    const double t_update = cfg.carhet.t_update_s;
    const double t_meas = cfg.carhet.t_meas_s;
    snapshots_kept_ = static_cast<std::size_t>(std::max(1L, std::lround(t_update / t_meas))) + 1;

    vehicles_.resize(n);
    for (std::uint32_t v = 0; v < n; ++v) {
      auto& veh = vehicles_[v];
      veh.app = cfg.app_profiles[profile_of[v]].requirement;
      veh.pps = veh.app.rate_bps / (8.0 * static_cast<double>(cfg.payload_bytes));
      const RatId rat = cfg.scheme.kind == SchemeKind::single_rat ? cfg.scheme.rat : any_rat(rng_);
      medium_->set_tx_rat(v, rat, 0.0);
      report_.vehicle_app.push_back(veh.app);
      veh.measured_cbr.assign(n_rat_, 0.0);
      veh.window_busy.assign(n_rat_, 0.0);
      queue_.push(u01(rng_) / veh.pps, EventType::app_packet, v);

      if (carhet) {
        veh.table.emplace(v, n_rat_);
        const double first = t_update + u01(rng_) * t_update;
        veh.engine.emplace(cfg.carhet, SelectionState{rat, 0, first, false, veh.app});
        queue_.push(first, EventType::evaluate, v);
        queue_.push(u01(rng_) * t_meas, EventType::cis_timer, v);
      } else if (cfg.scheme.kind == SchemeKind::random) {
        queue_.push(u01(rng_) * t_update, EventType::evaluate, v);
      }
    }
    if (carhet) queue_.push(0.0, EventType::measure_boundary, 0);
    queue_.push(cfg.warmup_s, EventType::window_boundary, 0);

    report_.cbr.assign(n * n_windows_ * n_rat_, 0.0);
    report_.window_rat.assign(n * n_windows_, 0);
    report_.window_throughput_bps.assign(n * n_windows_, std::nullopt);
  }

  MetricsReport run() {
    if (vehicles_.empty()) return std::move(report_);
    while (!queue_.empty() && queue_.next_time() <= cfg_.sim_time_s) {
      const Event e = queue_.pop();
      if (RadioMedium::handles(e.type)) {
        medium_->handle(e);
        continue;
      }
      switch (e.type) {
        case EventType::app_packet:
          on_app_packet(e.a, e.time);
          break;
        case EventType::cis_timer:
          if (!medium_->has_queued(e.a, FrameKind::cis)) {
            medium_->enqueue(e.a, {FrameKind::cis, 0, 0, e.time}, e.time);
          }
          queue_.push(e.time + cfg_.carhet.t_meas_s, EventType::cis_timer, e.a);
          break;
        case EventType::evaluate:
          if (cfg_.scheme.kind == SchemeKind::carhet) {
            evaluate_carhet(e.a, e.time);
          } else {
            evaluate_random(e.a, e.time);
          }
          break;
        case EventType::measure_boundary:
          on_measure_boundary(e.a, e.time);
          break;
        case EventType::window_boundary:
          on_window_boundary(e.a, e.time);
          break;
        default:
          break;
      }
    }
    report_.counters.events = queue_.processed();
    report_.counters.drops = medium_->stats().drops;
    for (std::size_t v = 0; v < vehicles_.size(); ++v) {
      const auto s = satisfaction_from(vehicles_[v].total_rx, vehicles_[v].app);
      report_.throughput_bps.push_back(s.has_receivers ? std::optional(s.throughput_bps) : std::nullopt);
    }
    return std::move(report_);
  }

  void on_tx_start(NodeId node, RatId rat, FrameRequest& request, double now) override {
    auto& veh = vehicles_[node];
    if (veh.on_air) ++report_.counters.concurrent_tx;
    veh.on_air = true;
    if (request.kind == FrameKind::data) {
      ++report_.counters.data_frames;
      if (veh.candidates_valid && !veh.last_candidates.empty() &&
          std::find(veh.last_candidates.begin(), veh.last_candidates.end(), rat) == veh.last_candidates.end()) {
        ++report_.counters.preselect_violations;
      }
      return;
    }
    if (request.kind != FrameKind::cis) return;
    veh.table->prune(now, cfg_.carhet.t_neigh_s);
    const OwnRow own{mobility_.position(node, now), veh.measured_cbr};
    const CisPacket packet = veh.table->build_cis(own, veh.engine->take_outgoing_flag(), now, mobility_.metric());
    veh.cis_wire = encode_cis(packet, n_rat_);
    request.payload_bytes = veh.cis_wire.size();
    ++report_.counters.cis_frames;
    report_.counters.cis_bytes += veh.cis_wire.size();
  }

  void on_tx_end(const Frame& frame, double now) override {
    auto& veh = vehicles_[frame.tx];
    veh.on_air = false;
    if (frame.request.kind == FrameKind::data) {
      if (!in_span(now)) return;
      const double d_max = veh.app.distance_m;
      for (const auto& link : frame.links) {
        if (link.distance_m > d_max) continue;
        count(veh, link.node, link.delivered);
      }
      return;
    }
    if (frame.request.kind != FrameKind::cis) return;
    CisPacket packet;
    try {
      packet = decode_cis(veh.cis_wire, n_rat_);
    } catch (const DecodeError&) {
      ++report_.counters.cis_decode_errors;
      return;
    }
    for (const auto& link : frame.links) {
      if (!link.delivered) continue;
      auto& rx = vehicles_[link.node];
      try {
        rx.table->ingest(packet, now);
      } catch (const DecodeError&) {
        ++report_.counters.cis_decode_errors;
        continue;
      }
      rx.engine->on_flag(packet.flag_hops_remaining);
    }
  }

  void on_drop(NodeId node, const FrameRequest& request, double now) override {
    if (request.kind != FrameKind::data || !in_span(now)) return;
    auto& veh = vehicles_[node];
    const auto metric = mobility_.metric();
    const Vec2 here = mobility_.position(node, now);
    for (std::uint32_t u = 0; u < vehicles_.size(); ++u) {
      if (u != node && metric(here, mobility_.position(u, now)) <= veh.app.distance_m) count(veh, u, false);
    }
  }

 private:
  struct Vehicle {
    AppRequirement app;
    double pps = 0.0;
    std::optional<ContextTable> table;
    std::optional<SelectionEngine> engine;
    std::vector<std::uint8_t> cis_wire;  // CIS currently on air
    std::vector<std::vector<double>> busy_snapshots;
    std::vector<double> measured_cbr;
    std::vector<RatId> last_candidates;
    bool candidates_valid = false;
    bool on_air = false;
    std::vector<double> window_busy;
    RxMap window_rx;
    RxMap total_rx;
  };

  [[nodiscard]] bool in_span(double t) const { return t >= cfg_.warmup_s && t < span_end_; }

  static void count(Vehicle& veh, std::uint32_t rx, bool delivered) {
    auto& w = veh.window_rx[rx];
    auto& t = veh.total_rx[rx];
    ++w.sent;
    ++t.sent;
    w.delivered += delivered;
    t.delivered += delivered;
  }

  void on_app_packet(std::uint32_t v, double now) {
    medium_->enqueue(v, {FrameKind::data, cfg_.payload_bytes, 0, now}, now);
    queue_.push(now + 1.0 / vehicles_[v].pps, EventType::app_packet, v);
  }

  void change_rat(std::uint32_t v, RatId to, double now) {
    const RatId from = medium_->tx_rat(v);
    medium_->set_tx_rat(v, to, now);
    report_.changes.push_back({v, now, from, to});
  }

  void evaluate_random(std::uint32_t v, double now) {
    std::uniform_int_distribution<int> any_rat(0, static_cast<int>(n_rat_) - 1);
    const RatId to = any_rat(rng_);
    ++report_.counters.evaluations;
    if (to != medium_->tx_rat(v)) change_rat(v, to, now);
    queue_.push(now + cfg_.carhet.t_update_s, EventType::evaluate, v);
  }

  void evaluate_carhet(std::uint32_t v, double now) {
    auto& veh = vehicles_[v];
    veh.table->prune(now, cfg_.carhet.t_neigh_s);
    EvaluationInputs in;
    in.catalog = &env_.catalog;
    in.pdr_families = env_.pdr_families;
    in.psr_set = psr_set_;
    in.measured_cbr = veh.measured_cbr;
    in.airtimes_s = airtime_;
    in.packets_per_second = veh.pps;
    in.own_position = mobility_.position(v, now);
    in.metric = mobility_.metric();
    const TickOutcome out = veh.engine->on_timer(now, *veh.table, in, rng_);
    if (out.postponed) ++report_.counters.postponements;
    if (out.evaluated) {
      ++report_.counters.evaluations;
      veh.last_candidates = out.candidates;
      veh.candidates_valid = true;
    }
    if (out.no_feasible_rat) ++report_.counters.no_feasible;
    if (out.changed_to) change_rat(v, *out.changed_to, now);
    queue_.push(veh.engine->state().next_eval_time_s, EventType::evaluate, v);
  }

  void on_measure_boundary(std::uint32_t k, double now) {
    for (std::uint32_t v = 0; v < vehicles_.size(); ++v) {
      auto& veh = vehicles_[v];
      std::vector<double> busy(n_rat_);
      for (std::size_t r = 0; r < n_rat_; ++r) busy[r] = medium_->busy_time(v, static_cast<RatId>(r), now);
      veh.busy_snapshots.push_back(busy);
      if (veh.busy_snapshots.size() > snapshots_kept_) veh.busy_snapshots.erase(veh.busy_snapshots.begin());
      const auto& oldest = veh.busy_snapshots.front();
      const double span = static_cast<double>(veh.busy_snapshots.size() - 1) * cfg_.carhet.t_meas_s;
      for (std::size_t r = 0; r < n_rat_; ++r) {
        veh.measured_cbr[r] = span > 0.0 ? std::clamp((busy[r] - oldest[r]) / span, 0.0, 1.0) : 0.0;
      }
    }
    queue_.push(static_cast<double>(k + 1) * cfg_.carhet.t_meas_s, EventType::measure_boundary, k + 1);
  }

  void on_window_boundary(std::uint32_t k, double now) {
    for (std::uint32_t v = 0; v < vehicles_.size(); ++v) {
      auto& veh = vehicles_[v];
      if (k > 0) {
        const std::size_t w = k - 1;
        for (std::size_t r = 0; r < n_rat_; ++r) {
          const double busy = medium_->busy_time(v, static_cast<RatId>(r), now);
          report_.cbr[(v * n_windows_ + w) * n_rat_ + r] =
              std::clamp((busy - veh.window_busy[r]) / cfg_.window_s, 0.0, 1.0);
          veh.window_busy[r] = busy;
        }
        const auto s = satisfaction_from(veh.window_rx, veh.app);
        if (s.has_receivers) report_.window_throughput_bps[v * n_windows_ + w] = s.throughput_bps;
        veh.window_rx.clear();
      } else {
        for (std::size_t r = 0; r < n_rat_; ++r) {
          veh.window_busy[r] = medium_->busy_time(v, static_cast<RatId>(r), now);
        }
      }
      if (k < n_windows_) report_.window_rat[v * n_windows_ + k] = medium_->tx_rat(v);
    }
    if (k < n_windows_) {
      queue_.push(cfg_.warmup_s + static_cast<double>(k + 1) * cfg_.window_s, EventType::window_boundary, k + 1);
    }
  }

  const SimConfig& cfg_;
  const SimEnvironment& env_;
  std::size_t n_rat_;
  Rng rng_;
  Mobility mobility_;
  EventQueue queue_;
  std::optional<RadioMedium> medium_;
  std::vector<PsrCurve> psr_set_;
  std::vector<double> airtime_;
  std::vector<Vehicle> vehicles_;
  std::size_t n_windows_ = 0;
  std::size_t snapshots_kept_ = 2;
  double span_end_ = 0.0;
  MetricsReport report_;
};

}  // namespace

std::optional<bool> MetricsReport::satisfied(std::size_t v) const {
  if (!throughput_bps[v]) return std::nullopt;
  const auto& app = vehicle_app[v];
  return *throughput_bps[v] / app.rate_bps >= app.reliability - 1e-12;
}

std::optional<bool> MetricsReport::window_satisfied(std::size_t v, std::size_t w) const {
  const auto& t = window_throughput_bps[v * n_windows + w];
  if (!t) return std::nullopt;
  const auto& app = vehicle_app[v];
  return *t / app.rate_bps >= app.reliability - 1e-12;
}

bool MetricsReport::operator==(const MetricsReport& o) const {
  return scheme == o.scheme && density_veh_per_km == o.density_veh_per_km && n_vehicles == o.n_vehicles &&
         n_rat == o.n_rat && n_windows == o.n_windows && window_s == o.window_s && warmup_s == o.warmup_s &&
         vehicle_app == o.vehicle_app && cbr == o.cbr && window_rat == o.window_rat &&
         window_throughput_bps == o.window_throughput_bps && throughput_bps == o.throughput_bps &&
         changes == o.changes && counters == o.counters;
}

MetricsReport run_simulation(const SimConfig& config, const SimEnvironment& env) {
  config.validate(env.catalog);
  hetv2v::validate(env.pathloss);
  if (config.scheme.kind == SchemeKind::carhet) {
    if (env.pdr_families.size() != env.catalog.size()) {
      throw ConfigError("carhet needs one PDR family per RAT");
    }
    for (std::size_t r = 0; r < env.pdr_families.size(); ++r) {
      if (env.pdr_families[r].empty() || env.pdr_families[r].rat_id != static_cast<RatId>(r)) {
        throw ConfigError("PDR family " + std::to_string(r) + " is empty or mislabelled");
      }
    }
  }
  Simulation sim(config, env);
  return sim.run();
}

double measure_cbr(std::span<const BusyInterval> intervals, double window_start_s, double window_s) {
  if (!(window_s > 0.0)) throw UsageError("measure_cbr: window must be > 0");
  const double lo = window_start_s;
  const double hi = window_start_s + window_s;
  std::vector<BusyInterval> clipped;
  for (const auto& i : intervals) {
    const double a = std::max(lo, i.start_s);
    const double b = std::min(hi, i.end_s);
    if (b > a) clipped.push_back({a, b});
  }
  std::sort(clipped.begin(), clipped.end(),
            [](const BusyInterval& x, const BusyInterval& y) { return x.start_s < y.start_s; });
  double busy = 0.0;
  double cur_a = 0.0;
  double cur_b = -std::numeric_limits<double>::infinity();
  for (const auto& i : clipped) {
    if (i.start_s > cur_b) {
      if (cur_b > cur_a) busy += cur_b - cur_a;
      cur_a = i.start_s;
      cur_b = i.end_s;
    } else {
      cur_b = std::max(cur_b, i.end_s);
    }
  }
  if (cur_b > cur_a) busy += cur_b - cur_a;
  return std::clamp(busy / window_s, 0.0, 1.0);
}

Satisfaction compute_satisfaction(std::span<const RxRecord> log, std::uint32_t vehicle,
                                  const AppRequirement& app, double window_start_s, double window_end_s) {
  std::unordered_map<std::uint32_t, RxCounter> per_rx;
  for (const auto& r : log) {
    if (r.tx != vehicle || r.time_s < window_start_s || r.time_s >= window_end_s) continue;
    auto& c = per_rx[r.rx];
    ++c.sent;
    c.delivered += r.delivered;
  }
  return satisfaction_from(per_rx, app);
}

std::vector<std::vector<double>> rat_change_intervals(std::span<const RatChange> changes, std::size_t n_vehicles) {
  std::vector<std::vector<double>> out(n_vehicles);
  std::vector<std::optional<double>> last(n_vehicles);
  for (const auto& c : changes) {
    if (c.vehicle >= n_vehicles) throw UsageError("rat_change_intervals: vehicle id out of range");
    if (last[c.vehicle]) out[c.vehicle].push_back(c.time_s - *last[c.vehicle]);
    last[c.vehicle] = c.time_s;
  }
  return out;
}

double quantile(std::vector<double> sample, double q) {
  if (sample.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(sample.begin(), sample.end());
  const double h = (static_cast<double>(sample.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto i = static_cast<std::size_t>(std::floor(h));
  const std::size_t j = std::min(i + 1, sample.size() - 1);
  return sample[i] + (h - static_cast<double>(i)) * (sample[j] - sample[i]);
}

RunSummary summarize(const MetricsReport& report) {
  RunSummary s;
  s.scheme = report.scheme;
  s.density_veh_per_km = report.density_veh_per_km;
  std::size_t satisfied = 0;
  for (std::size_t v = 0; v < report.n_vehicles; ++v) {
    if (const auto ok = report.satisfied(v)) {
      ++s.vehicles_counted;
      satisfied += *ok;
    }
  }
  s.percent_satisfied = s.vehicles_counted > 0 ? 100.0 * static_cast<double>(satisfied) / s.vehicles_counted : 0.0;

  for (std::size_t r = 0; r < report.n_rat; ++r) {
    std::vector<double> sample;
    sample.reserve(report.n_vehicles * report.n_windows);
    for (std::size_t v = 0; v < report.n_vehicles; ++v) {
      for (std::size_t w = 0; w < report.n_windows; ++w) sample.push_back(report.cbr_at(v, w, r));
    }
    std::sort(sample.begin(), sample.end());
    std::array<double, 5> q{};
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = quantile(sample, kSummaryQuantiles[i]);
    s.cbr_quantiles.push_back(q);
  }

  std::vector<RatChange> measured;
  for (const auto& c : report.changes) {
    if (c.time_s >= report.warmup_s) measured.push_back(c);
  }
  double sum = 0.0;
  for (const auto& per_vehicle : rat_change_intervals(measured, report.n_vehicles)) {
    for (const double tau : per_vehicle) {
      sum += tau;
      ++s.tau_samples;
    }
  }
  s.mean_tau_s = s.tau_samples > 0 ? sum / static_cast<double>(s.tau_samples)
                                   : std::numeric_limits<double>::quiet_NaN();
  return s;
}

void write_metrics_csv(std::ostream& out, const MetricsReport& report) {
  out << "vehicle_id,window_start_s,rat_id,cbr,throughput_bps,satisfied\n";
  out << std::setprecision(10);
  for (std::size_t v = 0; v < report.n_vehicles; ++v) {
    for (std::size_t w = 0; w < report.n_windows; ++w) {
      const double start = report.warmup_s + static_cast<double>(w) * report.window_s;
      const auto selected = static_cast<std::size_t>(report.window_rat[v * report.n_windows + w]);
      for (std::size_t r = 0; r < report.n_rat; ++r) {
        out << v << ',' << start << ',' << r << ',' << report.cbr_at(v, w, r) << ',';
        if (r == selected) {
          if (const auto& t = report.window_throughput_bps[v * report.n_windows + w]) {
            out << *t << ',' << (*report.window_satisfied(v, w) ? 1 : 0);
          } else {
            out << ',';
          }
        } else {
          out << ',';
        }
        out << '\n';
      }
    }
  }
}

void write_changes_csv(std::ostream& out, const MetricsReport& report) {
  out << "vehicle_id,time_s,from_rat,to_rat\n";
  out << std::setprecision(10);
  for (const auto& c : report.changes) out << c.vehicle << ',' << c.time_s << ',' << c.from << ',' << c.to << '\n';
}

void write_summary_header(std::ostream& out, std::size_t n_rat) {
  out << "scheme,density,percent_satisfied";
  for (std::size_t r = 0; r < n_rat; ++r) {
    for (const char* q : {"p5", "p25", "p50", "p75", "p95"}) out << ",cbr_rat" << r << '_' << q;
  }
  out << ",mean_tau_s,vehicles_counted,tau_samples\n";
}

void write_summary_row(std::ostream& out, const RunSummary& s) {
  out << std::setprecision(10);
  out << s.scheme << ',' << s.density_veh_per_km << ',' << s.percent_satisfied;
  for (const auto& q : s.cbr_quantiles) {
    for (const double v : q) out << ',' << v;
  }
  out << ',';
  if (!std::isnan(s.mean_tau_s)) out << s.mean_tau_s;
  out << ',' << s.vehicles_counted << ',' << s.tau_samples << '\n';
}

}  // namespace hetv2v
