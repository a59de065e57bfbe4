#include "hetv2v/radio_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>

#include "hetv2v/error.hpp"

namespace hetv2v {

namespace {

RatProfile make_profile(RatId id, std::string name, double freq, double bw, double tx, double noise,
                        double rate) {
  RatProfile p;
  p.id = id;
  p.name = std::move(name);
  p.carrier_freq_ghz = freq;
  p.bandwidth_mhz = bw;
  p.tx_power_dbm = tx;
  p.noise_floor_dbm = noise;
  p.rx_threshold_dbm = noise + 3.0;
  p.cs_threshold_dbm = p.rx_threshold_dbm;
  p.data_rate_mbps = rate;
  p.per_packet_overhead_s = 0.0;
  p.qpsk_half_rate_mbps = 6.0 * bw / 10.0;
  return p;
}

}  // namespace

Catalog default_catalog() {
  return {
      make_profile(0, "DSRC 0.7", 0.7, 10.0, 10.0, -97.0, 18.0),
      make_profile(1, "DSRC 5.9", 5.9, 10.0, 23.0, -97.0, 27.0),
      make_profile(2, "WiFi 2.4", 2.4, 20.0, 20.0, -94.0, 54.0),
      make_profile(3, "WiFi 5.6", 5.6, 20.0, 17.0, -94.0, 54.0),
      make_profile(4, "TVWS", 0.46, 6.0, 20.0, -99.0, 7.2),
  };
}

PathlossParams default_pathloss() { return PathlossParams{}; }

void validate(const RatProfile& p) {
  auto fail = [&](const char* field) {
    throw ConfigError("RAT '" + p.name + "': invalid " + field);
  };
  if (p.id < 0) fail("id");
  if (!(p.carrier_freq_ghz > 0.0)) fail("carrier_freq_ghz");
  if (!(p.bandwidth_mhz > 0.0)) fail("bandwidth_mhz");
  if (!(p.data_rate_mbps > 0.0)) fail("data_rate_mbps");
  if (!(p.qpsk_half_rate_mbps > 0.0)) fail("qpsk_half_rate_mbps");
  if (!(p.per_packet_overhead_s >= 0.0)) fail("per_packet_overhead_s");
  if (!std::isfinite(p.tx_power_dbm)) fail("tx_power_dbm");
  if (!std::isfinite(p.rx_threshold_dbm)) fail("rx_threshold_dbm");
  if (!std::isfinite(p.cs_threshold_dbm)) fail("cs_threshold_dbm");
}

void validate(const Catalog& catalog) {
  if (catalog.empty()) throw ConfigError("catalog is empty");
  std::set<std::string> names;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    validate(catalog[i]);
    if (catalog[i].id != static_cast<RatId>(i)) {
      throw ConfigError("catalog ids must be 0..N-1 in order; got id " +
                        std::to_string(catalog[i].id) + " at position " + std::to_string(i));
    }
    if (!names.insert(catalog[i].name).second) {
      throw ConfigError("duplicate RAT name '" + catalog[i].name + "'");
    }
  }
}

void validate(const PathlossParams& p) {
  if (!(p.slope_a >= 0.0)) throw ConfigError("pathloss: slope_a must be >= 0");
  if (!(p.slope_a_after_breakpoint >= 0.0)) {
    throw ConfigError("pathloss: slope_a_after_breakpoint must be >= 0");
  }
  if (!(p.ref_freq_ghz > 0.0)) throw ConfigError("pathloss: ref_freq_ghz must be > 0");
  if (!(p.breakpoint_distance_m > 0.0)) throw ConfigError("pathloss: breakpoint_distance_m must be > 0");
  if (!(p.shadowing_sigma_db >= 0.0)) throw ConfigError("pathloss: shadowing_sigma_db must be >= 0");
  if (!(p.min_distance_m > 0.0)) throw ConfigError("pathloss: min_distance_m must be > 0");
}

const RatProfile& find_rat(const Catalog& catalog, RatId id) {
  if (id < 0 || static_cast<std::size_t>(id) >= catalog.size()) {
    throw ConfigError("unknown RAT id " + std::to_string(id));
  }
  return catalog[static_cast<std::size_t>(id)];
}

std::optional<RatId> find_rat_by_name(const Catalog& catalog, const std::string& name) {
  for (const auto& p : catalog) {
    if (p.name == name) return p.id;
  }
  return std::nullopt;
}

double packet_airtime(const RatProfile& profile, std::size_t payload_bytes,
                      std::optional<double> rate_override_mbps) {
  const double rate = rate_override_mbps.value_or(profile.data_rate_mbps);
  if (!(rate > 0.0)) {
    throw ConfigError("RAT '" + profile.name + "': non-positive data rate");
  }
  return profile.per_packet_overhead_s + 8.0 * static_cast<double>(payload_bytes) / (rate * 1e6);
}

double mean_pathloss_db(const PathlossParams& params, double freq_ghz, double distance_m) {
  const double d = std::max(distance_m, params.min_distance_m);
  const double bp = params.breakpoint_distance_m;
  const double freq_term = params.freq_scaling_c * std::log10(freq_ghz / params.ref_freq_ghz);
  if (d <= bp) {
    return params.slope_a * std::log10(d) + params.intercept_b + freq_term;
  }
  return params.slope_a * std::log10(bp) + params.intercept_b +
         params.slope_a_after_breakpoint * std::log10(d / bp) + freq_term;
}

double mean_rx_power_dbm(const RatProfile& profile, const PathlossParams& params, double distance_m) {
  return profile.tx_power_dbm - mean_pathloss_db(params, profile.carrier_freq_ghz, distance_m);
}

double gaussian_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double exceed_probability(const RatProfile& profile, const PathlossParams& params,
                          double threshold_dbm, double distance_m) {
  const double margin = mean_rx_power_dbm(profile, params, distance_m) - threshold_dbm;
  if (params.shadowing_sigma_db <= 0.0) return margin >= 0.0 ? 1.0 : 0.0;
  return gaussian_tail(-margin / params.shadowing_sigma_db);
}

PsrCurve derive_psr(const RatProfile& profile, const PathlossParams& params, double max_distance_m,
                    double step_m) {
  if (!(max_distance_m > 0.0) || !(step_m > 0.0)) {
    throw ConfigError("derive_psr: max_distance and step must be positive");
  }
  PsrCurve curve;
  curve.rat_id = profile.id;
  curve.min_distance_m = params.min_distance_m;
  curve.step_m = step_m;
  const auto bins = static_cast<std::size_t>(
      std::floor((max_distance_m - params.min_distance_m) / step_m + 1e-9)) + 1;
  curve.values.reserve(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double d = params.min_distance_m + static_cast<double>(k) * step_m;
    curve.values.push_back(exceed_probability(profile, params, profile.cs_threshold_dbm, d));
  }
  return curve;
}

double PsrCurve::at(double distance_m) const {
  if (values.empty()) return 0.0;
  const double pos = (distance_m - min_distance_m) / step_m;
  if (pos <= 0.0) return values.front();
  const auto last = static_cast<double>(values.size() - 1);
  if (pos >= last) return values.back();
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double PsrCurve::max_distance_m() const {
  return values.empty() ? min_distance_m
                        : min_distance_m + step_m * static_cast<double>(values.size() - 1);
}

double interaction_range_m(const RatProfile& profile, const PathlossParams& params,
                           double threshold_dbm, double tail_sigmas) {
  const double margin = tail_sigmas * params.shadowing_sigma_db;
  auto reachable = [&](double d) {
    return mean_rx_power_dbm(profile, params, d) + margin >= threshold_dbm;
  };
  double lo = params.min_distance_m;
  if (!reachable(lo)) return lo;
  double hi = lo;
  while (reachable(hi)) {
    hi *= 2.0;
    if (hi > 1e9) return hi;
  }
  for (int i = 0; i < 100 && hi - lo > 1e-6; ++i) {
    const double mid = 0.5 * (lo + hi);
    (reachable(mid) ? lo : hi) = mid;
  }
  return hi;
}

void write_psr_csv(std::ostream& out, const PsrCurve& curve) {
  out << "distance_m,psr\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < curve.values.size(); ++k) {
    out << curve.min_distance_m + curve.step_m * static_cast<double>(k) << ',' << curve.values[k]
        << '\n';
  }
}

void to_json(nlohmann::json& j, const RatProfile& p) {
  j = nlohmann::json{{"id", p.id},
                     {"name", p.name},
                     {"carrier_freq_ghz", p.carrier_freq_ghz},
                     {"bandwidth_mhz", p.bandwidth_mhz},
                     {"tx_power_dbm", p.tx_power_dbm},
                     {"noise_floor_dbm", p.noise_floor_dbm},
                     {"rx_threshold_dbm", p.rx_threshold_dbm},
                     {"cs_threshold_dbm", p.cs_threshold_dbm},
                     {"data_rate_mbps", p.data_rate_mbps},
                     {"per_packet_overhead_s", p.per_packet_overhead_s},
                     {"qpsk_half_rate_mbps", p.qpsk_half_rate_mbps}};
}

void from_json(const nlohmann::json& j, RatProfile& p) {
  j.at("id").get_to(p.id);
  j.at("name").get_to(p.name);
  j.at("carrier_freq_ghz").get_to(p.carrier_freq_ghz);
  j.at("bandwidth_mhz").get_to(p.bandwidth_mhz);
  j.at("tx_power_dbm").get_to(p.tx_power_dbm);
  j.at("noise_floor_dbm").get_to(p.noise_floor_dbm);
  p.rx_threshold_dbm = j.value("rx_threshold_dbm", p.noise_floor_dbm + 3.0);
  p.cs_threshold_dbm = j.value("cs_threshold_dbm", p.rx_threshold_dbm);
  j.at("data_rate_mbps").get_to(p.data_rate_mbps);
  p.per_packet_overhead_s = j.value("per_packet_overhead_s", 0.0);
  p.qpsk_half_rate_mbps = j.value("qpsk_half_rate_mbps", 6.0 * p.bandwidth_mhz / 10.0);
}

void to_json(nlohmann::json& j, const PathlossParams& p) {
  j = nlohmann::json{{"slope_a", p.slope_a},
                     {"intercept_b", p.intercept_b},
                     {"freq_scaling_c", p.freq_scaling_c},
                     {"ref_freq_ghz", p.ref_freq_ghz},
                     {"breakpoint_distance_m", p.breakpoint_distance_m},
                     {"slope_a_after_breakpoint", p.slope_a_after_breakpoint},
                     {"shadowing_sigma_db", p.shadowing_sigma_db},
                     {"min_distance_m", p.min_distance_m}};
}

void from_json(const nlohmann::json& j, PathlossParams& p) {
  const PathlossParams d;
  p.slope_a = j.value("slope_a", d.slope_a);
  p.intercept_b = j.value("intercept_b", d.intercept_b);
  p.freq_scaling_c = j.value("freq_scaling_c", d.freq_scaling_c);
  p.ref_freq_ghz = j.value("ref_freq_ghz", d.ref_freq_ghz);
  p.breakpoint_distance_m = j.value("breakpoint_distance_m", d.breakpoint_distance_m);
  p.slope_a_after_breakpoint = j.value("slope_a_after_breakpoint", d.slope_a_after_breakpoint);
  p.shadowing_sigma_db = j.value("shadowing_sigma_db", d.shadowing_sigma_db);
  p.min_distance_m = j.value("min_distance_m", d.min_distance_m);
}

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

}  // namespace

Catalog load_catalog(const std::string& path) {
  const auto j = read_json_file(path);
  const auto& arr = j.is_object() ? j.at("rats") : j;
  Catalog catalog;
  try {
    catalog = arr.get<Catalog>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
  validate(catalog);
  return catalog;
}

PathlossParams load_pathloss(const std::string& path) {
  PathlossParams params;
  try {
    params = read_json_file(path).get<PathlossParams>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
  validate(params);
  return params;
}

}  // namespace hetv2v
