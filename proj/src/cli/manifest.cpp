#include "hetv2v/cli/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "hetv2v/error.hpp"

namespace hetv2v {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string provenance_header(const RunManifest& m) {
  return std::string("# hetv2v ") + kToolVersion + " manifest_hash=" + m.hash + " seed=" + std::to_string(m.seed);
}

void to_json(json& j, const MacParams& p) {
  j = json{{"backoff_slots", p.backoff_slots},
           {"slot_time_s", p.slot_time_s},
           {"queue_limit", p.queue_limit},
           {"position_refresh_s", p.position_refresh_s},
           {"tail_sigmas", p.tail_sigmas}};
  j["capture_margin_db"] = p.capture_margin_db ? json(*p.capture_margin_db) : json(nullptr);
}

void from_json(const json& j, MacParams& p) {
  const MacParams d;
  p.backoff_slots = j.value("backoff_slots", d.backoff_slots);
  p.slot_time_s = j.value("slot_time_s", d.slot_time_s);
  p.queue_limit = j.value("queue_limit", d.queue_limit);
  p.position_refresh_s = j.value("position_refresh_s", d.position_refresh_s);
  p.tail_sigmas = j.value("tail_sigmas", d.tail_sigmas);
  if (j.contains("capture_margin_db") && !j.at("capture_margin_db").is_null()) {
    p.capture_margin_db = j.at("capture_margin_db").get<double>();
  }
}

void to_json(json& j, const CalibrationConfig& c) {
  j = json{{"cbr_levels", c.cbr_levels},
           {"distances_m", c.distance_grid()},
           {"trials", c.trials},
           {"seed", c.seed},
           {"road_length_m", c.road_length_m},
           {"background_density_veh_per_km", c.background_density_veh_per_km},
           {"payload_bytes", c.payload_bytes},
           {"cbr_tolerance", c.cbr_tolerance},
           {"probes", c.probes},
           {"probe_rate_hz", c.probe_rate_hz},
           {"bisection_duration_s", c.bisection_duration_s},
           {"warmup_s", c.warmup_s},
           {"max_bisection_steps", c.max_bisection_steps},
           {"mac", c.mac}};
}

void to_json(json& j, const SimConfig& c) {
  json profiles = json::array();
  for (const auto& p : c.app_profiles) {
    profiles.push_back({{"fraction", p.fraction},
                        {"rate_bps", p.requirement.rate_bps},
                        {"distance_m", p.requirement.distance_m},
                        {"reliability", p.requirement.reliability}});
  }
  j = json{{"road_length_m", c.mobility.road_length_m},
           {"lanes", c.mobility.lanes},
           {"lane_width_m", c.mobility.lane_width_m},
           {"density_veh_per_km", c.mobility.density_veh_per_km},
           {"max_speed_kmh", c.mobility.max_speed_kmh},
           {"sim_time_s", c.sim_time_s},
           {"warmup_s", c.warmup_s},
           {"window_s", c.window_s},
           {"seed", c.seed},
           {"scheme", c.scheme.to_string()},
           {"app_profiles", profiles},
           {"payload_bytes", c.payload_bytes},
           {"t_meas_s", c.carhet.t_meas_s},
           {"t_update_s", c.carhet.t_update_s},
           {"t_neigh_s", c.carhet.t_neigh_s},
           {"alpha", c.carhet.alpha},
           {"mac", c.mac}};
}

namespace {

/// Typed field access with errors naming the manifest path.
class Block {
 public:
  Block(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    for (const auto& [key, value] : j_.items()) {
      if (!allowed.contains(key)) throw ConfigError(path_ + "." + key + ": unknown field");
    }
  }

  template <typename T>
  void read(const char* key, T& out) const {
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + ": wrong type (" + j_.at(key).dump() + ")");
    }
  }

  [[nodiscard]] bool has(const char* key) const { return j_.contains(key); }
  [[nodiscard]] const json& at(const char* key) const { return j_.at(key); }
  [[nodiscard]] std::string field(const char* key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
};

MacParams read_mac(const Block& b, const char* key, MacParams base) {
  if (!b.has(key)) return base;
  const Block m(b.at(key), b.field(key),
                {"backoff_slots", "slot_time_s", "queue_limit", "capture_margin_db", "position_refresh_s",
                 "tail_sigmas"});
  m.read("backoff_slots", base.backoff_slots);
  m.read("slot_time_s", base.slot_time_s);
  m.read("queue_limit", base.queue_limit);
  m.read("position_refresh_s", base.position_refresh_s);
  m.read("tail_sigmas", base.tail_sigmas);
  if (m.has("capture_margin_db")) {
    if (m.at("capture_margin_db").is_null()) {
      base.capture_margin_db.reset();
    } else {
      double v = 0.0;
      m.read("capture_margin_db", v);
      base.capture_margin_db = v;
    }
  }
  if (base.backoff_slots < 1) throw ConfigError(b.field(key) + ".backoff_slots: must be >= 1");
  if (!(base.slot_time_s >= 0.0)) throw ConfigError(b.field(key) + ".slot_time_s: must be >= 0");
  if (base.queue_limit < 1) throw ConfigError(b.field(key) + ".queue_limit: must be >= 1");
  if (!(base.position_refresh_s >= 0.0)) throw ConfigError(b.field(key) + ".position_refresh_s: must be >= 0");
  if (!(base.tail_sigmas > 0.0)) throw ConfigError(b.field(key) + ".tail_sigmas: must be > 0");
  return base;
}

std::string resolve(const std::string& value, const std::filesystem::path& base_dir) {
  std::filesystem::path p(value);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return p.string();
}

void read_sim_config(const Block& b, SimConfig& c) {
  b.read("road_length_m", c.mobility.road_length_m);
  b.read("lanes", c.mobility.lanes);
  b.read("lane_width_m", c.mobility.lane_width_m);
  b.read("density_veh_per_km", c.mobility.density_veh_per_km);
  b.read("max_speed_kmh", c.mobility.max_speed_kmh);
  b.read("sim_time_s", c.sim_time_s);
  b.read("warmup_s", c.warmup_s);
  b.read("window_s", c.window_s);
  b.read("payload_bytes", c.payload_bytes);
  b.read("t_meas_s", c.carhet.t_meas_s);
  b.read("t_update_s", c.carhet.t_update_s);
  b.read("t_neigh_s", c.carhet.t_neigh_s);
  b.read("alpha", c.carhet.alpha);
  c.mac = read_mac(b, "mac", c.mac);
  if (b.has("app_profiles")) {
    const json& arr = b.at("app_profiles");
    if (!arr.is_array()) throw ConfigError(b.field("app_profiles") + ": expected an array");
    c.app_profiles.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const Block p(arr[i], b.field("app_profiles") + "[" + std::to_string(i) + "]",
                    {"fraction", "rate_bps", "distance_m", "reliability"});
      AppProfile ap;
      p.read("fraction", ap.fraction);
      p.read("rate_bps", ap.requirement.rate_bps);
      p.read("distance_m", ap.requirement.distance_m);
      p.read("reliability", ap.requirement.reliability);
      c.app_profiles.push_back(ap);
    }
  }
}

}  // namespace

RunManifest parse_manifest(const json& j, const CliOverrides& overrides, const std::filesystem::path& base_dir) {
  RunManifest m;
  m.hash = hex64(fnv1a64(j.dump()));
  const Block root(j, "manifest",
                   {"catalog", "pathloss", "seed", "output_dir", "capacity", "calibration", "simulate", "cost"});

  root.read("seed", m.seed);
  std::string out = m.output_dir.string();
  root.read("output_dir", out);
  m.output_dir = out;

  std::string catalog = "default";
  root.read("catalog", catalog);
  if (catalog != "default") {
    const auto path = resolve(catalog, base_dir);
    if (!std::filesystem::exists(path)) throw ConfigError("manifest.catalog: file not found: " + path);
    m.catalog = load_catalog(path);
  }
  std::string pathloss = "default";
  root.read("pathloss", pathloss);
  if (pathloss != "default") {
    const auto path = resolve(pathloss, base_dir);
    if (!std::filesystem::exists(path)) throw ConfigError("manifest.pathloss: file not found: " + path);
    m.pathloss = load_pathloss(path);
  }

  if (root.has("capacity")) {
    const Block c(root.at("capacity"), "manifest.capacity", {"sweep", "payload_bytes", "cbr_max"});
    c.read("payload_bytes", m.capacity_payload_bytes);
    c.read("cbr_max", m.capacity_cbr_max);
    if (!(m.capacity_cbr_max > 0.0 && m.capacity_cbr_max <= 1.0)) {
      throw ConfigError("manifest.capacity.cbr_max: must lie in (0, 1]");
    }
    if (c.has("sweep")) {
      const json& arr = c.at("sweep");
      if (!arr.is_array()) throw ConfigError("manifest.capacity.sweep: expected an array");
      m.capacity_sweep.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "manifest.capacity.sweep[" + std::to_string(i) + "]";
        const Block p(arr[i], path, {"rate_mbps", "mcs_mode"});
        CapacityPoint pt;
        p.read("rate_mbps", pt.rate_mbps);
        std::string mode = "highest";
        p.read("mcs_mode", mode);
        try {
          pt.mode = parse_mcs_mode(mode);
        } catch (const std::exception& e) {
          throw ConfigError(path + ".mcs_mode: " + e.what());
        }
        if (!(pt.rate_mbps >= 0.0)) throw ConfigError(path + ".rate_mbps: must be >= 0");
        m.capacity_sweep.push_back(pt);
      }
    }
  }

  m.calibration.seed = 1;
  if (root.has("calibration")) {
    const Block c(root.at("calibration"), "manifest.calibration",
                  {"cbr_levels", "distances_m", "trials", "seed", "road_length_m", "background_density_veh_per_km",
                   "payload_bytes", "cbr_tolerance", "probes", "probe_rate_hz", "bisection_duration_s",
                   "warmup_s", "max_bisection_steps", "mac"});
    auto& k = m.calibration;
    c.read("cbr_levels", k.cbr_levels);
    c.read("distances_m", k.distances_m);
    c.read("trials", k.trials);
    c.read("seed", k.seed);
    c.read("road_length_m", k.road_length_m);
    c.read("background_density_veh_per_km", k.background_density_veh_per_km);
    c.read("payload_bytes", k.payload_bytes);
    c.read("cbr_tolerance", k.cbr_tolerance);
    c.read("probes", k.probes);
    c.read("probe_rate_hz", k.probe_rate_hz);
    c.read("bisection_duration_s", k.bisection_duration_s);
    c.read("warmup_s", k.warmup_s);
    c.read("max_bisection_steps", k.max_bisection_steps);
    k.mac = read_mac(c, "mac", k.mac);
    if (k.trials < 1) throw ConfigError("manifest.calibration.trials: must be >= 1");
  }

  m.schemes = {{SchemeKind::single_rat, 1}, {SchemeKind::random, 0}, {SchemeKind::carhet, 0}};
  if (root.has("simulate")) {
    const Block s(root.at("simulate"), "manifest.simulate",
                  {"schemes", "densities", "repetitions", "scenario", "config"});
    if (s.has("schemes")) {
      std::vector<std::string> names;
      s.read("schemes", names);
      m.schemes.clear();
      for (const auto& n : names) {
        try {
          m.schemes.push_back(parse_scheme(n, m.catalog));
        } catch (const ConfigError& e) {
          throw ConfigError(std::string("manifest.simulate.schemes: ") + e.what());
        }
      }
    }
    s.read("densities", m.densities);
    s.read("repetitions", m.repetitions);
    s.read("scenario", m.scenario);
    if (s.has("config")) {
      const Block c(s.at("config"), "manifest.simulate.config",
                    {"road_length_m", "lanes", "lane_width_m", "density_veh_per_km", "max_speed_kmh", "sim_time_s",
                     "warmup_s", "window_s", "payload_bytes", "t_meas_s", "t_update_s", "t_neigh_s", "alpha",
                     "mac", "app_profiles"});
      read_sim_config(c, m.sim);
    }
  }
  if (m.repetitions < 1) throw ConfigError("manifest.simulate.repetitions: must be >= 1");
  for (const double d : m.densities) {
    if (!(d >= 0.0)) throw ConfigError("manifest.simulate.densities: must be >= 0");
  }

  if (root.has("cost")) {
    const Block c(root.at("cost"), "manifest.cost",
                  {"n_max", "cpu_ghz", "t_meas_s", "t_update_s", "s_t_bits", "s_lat_bits", "s_lon_bits",
                   "s_cbr_bits"});
    c.read("n_max", m.cost_n_max);
    c.read("cpu_ghz", m.cost_cpu_ghz);
    c.read("t_meas_s", m.cost.t_meas_s);
    c.read("t_update_s", m.cost.t_update_s);
    c.read("s_t_bits", m.cost.s_t_bits);
    c.read("s_lat_bits", m.cost.s_lat_bits);
    c.read("s_lon_bits", m.cost.s_lon_bits);
    c.read("s_cbr_bits", m.cost.s_cbr_bits);
  }
  if (m.cost_n_max < 0) throw ConfigError("manifest.cost.n_max: must be >= 0");
  for (const double g : m.cost_cpu_ghz) {
    if (!(g > 0.0)) throw ConfigError("manifest.cost.cpu_ghz: must be > 0");
  }
  if (!(m.cost.t_meas_s > 0.0)) throw ConfigError("manifest.cost.t_meas_s: must be > 0");
  if (!(m.cost.t_update_s > 0.0)) throw ConfigError("manifest.cost.t_update_s: must be > 0");
  if (m.cost.s_t_bits <= 0 || m.cost.s_lat_bits <= 0 || m.cost.s_lon_bits <= 0 || m.cost.s_cbr_bits <= 0) {
    throw ConfigError("manifest.cost: field sizes must be > 0");
  }
  m.cost.n_rat = static_cast<std::int64_t>(m.catalog.size());
  double bw = 0.0;
  for (const auto& p : m.catalog) bw += p.bandwidth_mhz * 1e6;
  m.cost.total_bandwidth_hz = bw;

  if (overrides.out_dir) m.output_dir = *overrides.out_dir;
  if (overrides.seed) m.seed = *overrides.seed;
  if (overrides.scenario) m.scenario = *overrides.scenario;
  if (m.scenario == "mixed") {
    m.sim.app_profiles = mixed_app_profiles();
  } else if (m.scenario != "uniform") {
    throw ConfigError("scenario: expected 'uniform' or 'mixed', got '" + m.scenario + "'");
  }
  m.sim.seed = m.seed;
  m.sim.validate(m.catalog);
  return m;
}

RunManifest load_manifest(const std::string& path, const CliOverrides& overrides) {
  if (path.empty()) return parse_manifest(json::object(), overrides);
  std::ifstream in(path);
  if (!in) throw ConfigError("manifest: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("manifest: '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw ConfigError("manifest: expected a JSON object");
  return parse_manifest(j, overrides, std::filesystem::path(path).parent_path());
}

}  // namespace hetv2v
