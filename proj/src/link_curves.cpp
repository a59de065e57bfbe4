#include "hetv2v/link_curves.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "hetv2v/capacity.hpp"
#include "hetv2v/error.hpp"
#include "hetv2v/sim/seeding.hpp"

namespace hetv2v {

std::vector<double> CalibrationConfig::distance_grid() const {
  if (!distances_m.empty()) return distances_m;
  std::vector<double> grid;
  for (int d = 0; d <= 500; d += 10) grid.push_back(d);
  return grid;
}

namespace {

void validate(const CalibrationConfig& cfg, const std::vector<double>& grid) {
  if (cfg.trials < 1) throw ConfigError("calibration trials must be >= 1");
  if (cfg.cbr_levels.empty() || grid.empty()) throw ConfigError("calibration grid is empty");
  for (std::size_t i = 0; i < cfg.cbr_levels.size(); ++i) {
    const double c = cfg.cbr_levels[i];
    if (!(c >= 0.0 && c < 1.0)) throw ConfigError("calibration CBR levels must lie in [0, 1)");
    if (i > 0 && !(c > cfg.cbr_levels[i - 1])) throw ConfigError("calibration CBR levels must ascend");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) throw ConfigError("calibration distances must be >= 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError("calibration distances must ascend");
  }
  if (cfg.probes < 1 || !(cfg.probe_rate_hz > 0.0)) throw ConfigError("calibration needs probe traffic");
  if (!(cfg.road_length_m > 2.0 * grid.back())) {
    throw ConfigError("calibration road must exceed twice the largest distance");
  }
  if (!(cfg.background_density_veh_per_km >= 0.0)) throw ConfigError("background density must be >= 0");
}

/// Ring with background broadcasters on one lane, probe transmitters on the
/// next lane and one passive receiver per grid distance ahead of each probe.
class Scene : public MediumListener {
 public:
  Scene(const RatProfile& profile, const PathlossParams& params, const CalibrationConfig& cfg,
        std::vector<double> grid, double bg_rate_hz, std::uint64_t seed)
      : cfg_(cfg), grid_(std::move(grid)), bg_rate_(bg_rate_hz), rng_(seed) {
    const auto n_bg = static_cast<std::size_t>(
        std::llround(cfg.background_density_veh_per_km * cfg.road_length_m / 1000.0));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double offset = u01(rng_) * cfg.road_length_m;
    for (std::size_t i = 0; i < n_bg; ++i) {
      const double x = offset + static_cast<double>(i) * cfg.road_length_m / static_cast<double>(n_bg);
      pos_.push_back({std::fmod(x, cfg.road_length_m), 0.0});
    }
    first_probe_ = static_cast<NodeId>(pos_.size());
    constexpr double kLane = 4.0;
    for (std::size_t p = 0; p < cfg.probes; ++p) {
      pos_.push_back({static_cast<double>(p) * cfg.road_length_m / static_cast<double>(cfg.probes), kLane});
    }
    first_rx_ = static_cast<NodeId>(pos_.size());
    for (std::size_t p = 0; p < cfg.probes; ++p) {
      for (const double d : grid_) {
        pos_.push_back({std::fmod(pos_[first_probe_ + p].x + d, cfg.road_length_m), kLane});
      }
    }
    Catalog single{profile};
    single[0].id = 0;
    medium_.emplace(single, params, cfg.mac, pos_.size(), cfg.road_length_m,
                    [this](NodeId n, double) { return pos_[n]; }, queue_, rng_, *this);
    sent_.assign(grid_.size(), 0);
    delivered_.assign(grid_.size(), 0);

    if (bg_rate_ > 0.0) {
      for (NodeId n = 0; n < first_probe_; ++n) {
        queue_.push(u01(rng_) / bg_rate_, EventType::background_packet, n);
      }
    }
    for (std::size_t p = 0; p < cfg.probes; ++p) {
      queue_.push(u01(rng_) / cfg.probe_rate_hz, EventType::probe_packet,
                  first_probe_ + static_cast<NodeId>(p));
    }
  }

  /// Runs until `until_s`, or until `stop_after_trials` probe frames per
  /// distance have been sent after warmup (0 = no such limit).
  void run(double until_s, std::uint32_t stop_after_trials) {
    stop_after_ = stop_after_trials;
    bool warm = false;
    while (!queue_.empty() && queue_.next_time() <= until_s && !done_) {
      if (!warm && queue_.next_time() >= cfg_.warmup_s) {
        warm = true;
        start_busy_snapshot(cfg_.warmup_s);
      }
      const Event e = queue_.pop();
      if (RadioMedium::handles(e.type)) {
        medium_->handle(e);
        continue;
      }
      if (e.type == EventType::background_packet) {
        medium_->enqueue(e.a, {FrameKind::data, cfg_.payload_bytes, 0, e.time}, e.time);
        queue_.push(e.time + 1.0 / bg_rate_, EventType::background_packet, e.a);
      } else if (e.type == EventType::probe_packet) {
        medium_->enqueue(e.a, {FrameKind::probe, cfg_.payload_bytes, e.a - first_probe_, e.time}, e.time);
        queue_.push(e.time + 1.0 / cfg_.probe_rate_hz, EventType::probe_packet, e.a);
      }
    }
    if (!warm) start_busy_snapshot(cfg_.warmup_s);
    end_s_ = done_ ? queue_.now() : until_s;
  }

  void on_tx_end(const Frame& frame, double now) override {
    if (frame.request.kind != FrameKind::probe || frame.start_s < cfg_.warmup_s || done_) return;
    const auto probe = static_cast<std::size_t>(frame.request.tag);
    const NodeId lo = first_rx_ + static_cast<NodeId>(probe * grid_.size());
    const NodeId hi = lo + static_cast<NodeId>(grid_.size());
    for (auto& s : sent_) ++s;
    for (const auto& link : frame.links) {
      if (link.delivered && link.node >= lo && link.node < hi) ++delivered_[link.node - lo];
    }
    if (stop_after_ > 0 && sent_.front() >= stop_after_) done_ = true;
    (void)now;
  }

  [[nodiscard]] double measured_cbr() const {
    const double span = end_s_ - cfg_.warmup_s;
    if (!(span > 0.0)) return 0.0;
    double sum = 0.0;
    for (NodeId n = first_rx_; n < pos_.size(); ++n) {
      sum += medium_->busy_time(n, 0, end_s_) - busy_at_warmup_[n - first_rx_];
    }
    return sum / (span * static_cast<double>(pos_.size() - first_rx_));
  }
  [[nodiscard]] const std::vector<std::uint32_t>& sent() const { return sent_; }
  [[nodiscard]] const std::vector<std::uint32_t>& delivered() const { return delivered_; }

 private:
  void start_busy_snapshot(double t) {
    busy_at_warmup_.clear();
    for (NodeId n = first_rx_; n < pos_.size(); ++n) busy_at_warmup_.push_back(medium_->busy_time(n, 0, t));
  }

  const CalibrationConfig& cfg_;
  std::vector<double> grid_;
  double bg_rate_;
  Rng rng_;
  EventQueue queue_;
  std::vector<Vec2> pos_;
  NodeId first_probe_ = 0;
  NodeId first_rx_ = 0;
  std::optional<RadioMedium> medium_;
  std::vector<std::uint32_t> sent_;
  std::vector<std::uint32_t> delivered_;
  std::vector<double> busy_at_warmup_;
  std::uint32_t stop_after_ = 0;
  bool done_ = false;
  double end_s_ = 0.0;
};

}  // namespace

SceneMeasurement run_calibration_scene(const RatProfile& profile, const PathlossParams& params,
                                       const CalibrationConfig& config, double background_rate_hz,
                                       double duration_s, std::uint64_t seed) {
  const auto grid = config.distance_grid();
  validate(config, grid);
  Scene scene(profile, params, config, grid, background_rate_hz, seed);
  scene.run(config.warmup_s + duration_s, 0);
  return {scene.measured_cbr(), scene.sent(), scene.delivered()};
}

PdrCurveFamily calibrate_pdr(const RatProfile& profile, const PathlossParams& params,
                             const CalibrationConfig& config) {
  const auto grid = config.distance_grid();
  validate(config, grid);
  validate(profile);
  validate(params);

  PdrCurveFamily family;
  family.rat_id = profile.id;
  family.cbr_levels = config.cbr_levels;
  family.distances_m = grid;
  family.values.assign(config.cbr_levels.size() * grid.size(), 0.0);
  family.sample_counts.assign(family.values.size(), 0);

  const double airtime = packet_airtime(profile, config.payload_bytes);
  const PsrCurve psr = derive_psr(profile, params, config.road_length_m / 2.0, 1.0);
  const double beta = config.background_density_veh_per_km / 1000.0;
  const double footprint = psr_footprint_m(psr);
  const double max_rate = 1.0 / airtime;  // one node alone would saturate

  for (std::size_t li = 0; li < config.cbr_levels.size(); ++li) {
    const double target = config.cbr_levels[li];
    const std::uint64_t seed = derive_seed(config.seed, {static_cast<std::uint64_t>(profile.id), li});
    auto measure = [&](double rate) {
      return run_calibration_scene(profile, params, config, rate, config.bisection_duration_s, seed)
          .measured_cbr;
    };

    double rate = 0.0;
    if (target > 0.0) {
      if (!(beta > 0.0 && footprint > 0.0)) {
        throw CalibrationError("no background traffic available to reach CBR " + std::to_string(target));
      }
      // Analytic first guess, then bracket and bisect on the same random stream.
      double lo = 0.0;
      double hi = std::min(max_rate, target / (airtime * beta * footprint));
      double m_hi = measure(hi);
      while (m_hi < target - config.cbr_tolerance && hi < max_rate) {
        lo = hi;
        hi = std::min(max_rate, hi * 2.0);
        m_hi = measure(hi);
      }
      if (m_hi < target - config.cbr_tolerance) {
        throw CalibrationError("RAT " + profile.name + ": CBR level " + std::to_string(target) +
                               " unreachable, channel saturates at " + std::to_string(m_hi));
      }
      rate = hi;
      double best_err = std::abs(m_hi - target);
      for (int step = 0; step < config.max_bisection_steps && best_err > config.cbr_tolerance; ++step) {
        const double mid = 0.5 * (lo + hi);
        const double m = measure(mid);
        if (std::abs(m - target) < best_err) {
          best_err = std::abs(m - target);
          rate = mid;
        }
        (m < target ? lo : hi) = mid;
      }
      if (best_err > config.cbr_tolerance) {
        throw CalibrationError("RAT " + profile.name + ": CBR level " + std::to_string(target) +
                               " not reached within tolerance (best error " + std::to_string(best_err) + ")");
      }
    }

    Scene scene(profile, params, config, grid, rate, seed);
    const double needed = static_cast<double>(config.trials) /
                          (static_cast<double>(config.probes) * config.probe_rate_hz);
    scene.run(config.warmup_s + 4.0 * needed + 10.0, config.trials);
    for (std::size_t di = 0; di < grid.size(); ++di) {
      const auto s = scene.sent()[di];
      family.sample_counts[li * grid.size() + di] = s;
      family.at(li, di) = s > 0 ? static_cast<double>(scene.delivered()[di]) / s : 0.0;
    }
  }
  smooth_monotone(family);
  return family;
}

double pdr_lookup(const PdrCurveFamily& family, double cbr, double distance_m) {
  if (family.empty()) throw UsageError("pdr_lookup on an empty PDR family");
  auto locate = [](const std::vector<double>& axis, double v, std::size_t& i, double& w) {
    if (axis.size() == 1 || v <= axis.front()) {
      i = 0;
      w = 0.0;
      return;
    }
    if (v >= axis.back()) {
      i = axis.size() - 2;
      w = 1.0;
      return;
    }
    i = static_cast<std::size_t>(std::upper_bound(axis.begin(), axis.end(), v) - axis.begin()) - 1;
    w = (v - axis[i]) / (axis[i + 1] - axis[i]);
  };
  std::size_t ci = 0;
  std::size_t di = 0;
  double cw = 0.0;
  double dw = 0.0;
  locate(family.cbr_levels, cbr, ci, cw);
  locate(family.distances_m, distance_m, di, dw);
  const std::size_t c1 = std::min(ci + 1, family.cbr_levels.size() - 1);
  const std::size_t d1 = std::min(di + 1, family.distances_m.size() - 1);
  const double top = (1.0 - dw) * family.at(ci, di) + dw * family.at(ci, d1);
  const double bottom = (1.0 - dw) * family.at(c1, di) + dw * family.at(c1, d1);
  return std::clamp((1.0 - cw) * top + cw * bottom, 0.0, 1.0);
}

std::vector<double> isotonic_nonincreasing(const std::vector<double>& y, const std::vector<double>& w) {
  if (y.size() != w.size()) throw UsageError("isotonic_nonincreasing: size mismatch");
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({y[i], std::max(w[i], 1e-12), 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean < blocks.back().mean) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      a.mean = (a.mean * a.weight + b.mean * b.weight) / (a.weight + b.weight);
      a.weight += b.weight;
      a.count += b.count;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.mean);
  return out;
}

void smooth_monotone(PdrCurveFamily& family) {
  if (family.empty()) return;
  const std::size_t nl = family.cbr_levels.size();
  const std::size_t nd = family.distances_m.size();
  auto weight = [&](std::size_t l, std::size_t d) {
    return family.sample_counts.empty() ? 1.0 : std::max<double>(family.samples(l, d), 1.0);
  };
  auto rows = [&] {
    for (std::size_t l = 0; l < nl; ++l) {
      std::vector<double> y(nd);
      std::vector<double> w(nd);
      for (std::size_t d = 0; d < nd; ++d) {
        y[d] = family.at(l, d);
        w[d] = weight(l, d);
      }
      const auto fit = isotonic_nonincreasing(y, w);
      for (std::size_t d = 0; d < nd; ++d) family.at(l, d) = fit[d];
    }
  };
  auto columns = [&] {
    for (std::size_t d = 0; d < nd; ++d) {
      std::vector<double> y(nl);
      std::vector<double> w(nl);
      for (std::size_t l = 0; l < nl; ++l) {
        y[l] = family.at(l, d);
        w[l] = weight(l, d);
      }
      const auto fit = isotonic_nonincreasing(y, w);
      for (std::size_t l = 0; l < nl; ++l) family.at(l, d) = fit[l];
    }
  };
  for (int pass = 0; pass < 8; ++pass) {
    rows();
    columns();
  }
  // Rows stay non-increasing under a running minimum down the load axis.
  rows();
  for (std::size_t l = 1; l < nl; ++l) {
    for (std::size_t d = 0; d < nd; ++d) family.at(l, d) = std::min(family.at(l, d), family.at(l - 1, d));
  }
  for (auto& v : family.values) v = std::clamp(v, 0.0, 1.0);
}

namespace {
constexpr const char* kPdrMagic = "# hetv2v-pdr v1";
}

void write_pdr_csv(std::ostream& out, const PdrCurveFamily& family, const std::string& provenance) {
  out << kPdrMagic << '\n';
  out << "# " << provenance << '\n';
  out << "# rows=" << family.values.size() << '\n';
  out << "rat_id,cbr,distance_m,pdr,samples\n";
  out << std::setprecision(17);
  for (std::size_t l = 0; l < family.cbr_levels.size(); ++l) {
    for (std::size_t d = 0; d < family.distances_m.size(); ++d) {
      out << family.rat_id << ',' << family.cbr_levels[l] << ',' << family.distances_m[d] << ','
          << family.at(l, d) << ',' << (family.sample_counts.empty() ? 0U : family.samples(l, d)) << '\n';
    }
  }
}

PdrCurveFamily read_pdr_csv(std::istream& in, std::string* provenance) {
  std::string line;
  if (!std::getline(in, line) || line != kPdrMagic) throw ConfigError("PDR file: missing version line");
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw ConfigError("PDR file: missing key line");
  if (provenance) *provenance = line.substr(2);
  std::size_t rows = 0;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "# rows=%zu", &rows) != 1) {
    throw ConfigError("PDR file: missing row count");
  }
  if (!std::getline(in, line) || line != "rat_id,cbr,distance_m,pdr,samples") {
    throw ConfigError("PDR file: bad column header");
  }
  struct Row {
    double pdr;
    std::uint32_t samples;
  };
  std::map<std::pair<double, double>, Row> cells;
  std::optional<RatId> rat;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f[5];
    for (int i = 0; i < 5; ++i) {
      if (!std::getline(ls, f[i], i < 4 ? ',' : '\n')) throw ConfigError("PDR file: short row " + line);
    }
    try {
      std::size_t used = 0;
      const int id = std::stoi(f[0], &used);
      const double cbr = std::stod(f[1]);
      const double dist = std::stod(f[2]);
      const double pdr = std::stod(f[3]);
      const unsigned long samples = std::stoul(f[4]);
      if (rat && *rat != id) throw ConfigError("PDR file: mixed RAT ids");
      rat = id;
      if (!(pdr >= 0.0 && pdr <= 1.0)) throw ConfigError("PDR file: value outside [0, 1]");
      if (!cells.emplace(std::pair{cbr, dist}, Row{pdr, static_cast<std::uint32_t>(samples)}).second) {
        throw ConfigError("PDR file: duplicate cell");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("PDR file: unparsable row " + line);
    }
    ++count;
  }
  if (count != rows || rows == 0) throw ConfigError("PDR file: row count mismatch");

  PdrCurveFamily family;
  family.rat_id = *rat;
  for (const auto& [key, row] : cells) {
    if (family.cbr_levels.empty() || family.cbr_levels.back() != key.first) family.cbr_levels.push_back(key.first);
  }
  for (const auto& [key, row] : cells) {
    if (key.first != family.cbr_levels.front()) break;
    family.distances_m.push_back(key.second);
  }
  if (family.cbr_levels.size() * family.distances_m.size() != rows) {
    throw ConfigError("PDR file: grid is incomplete");
  }
  for (const double c : family.cbr_levels) {
    for (const double d : family.distances_m) {
      const auto it = cells.find({c, d});
      if (it == cells.end()) throw ConfigError("PDR file: grid is incomplete");
      family.values.push_back(it->second.pdr);
      family.sample_counts.push_back(it->second.samples);
    }
  }
  return family;
}

}  // namespace hetv2v
