#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hetv2v/carhet/cis_codec.hpp"
#include "hetv2v/cost_model.hpp"
#include "hetv2v/error.hpp"
#include "hetv2v/sim/event_queue.hpp"
#include "hetv2v/sim/simulator.hpp"

using namespace hetv2v;

namespace {

// PDR(40 m) = 0.99 at every load; enough to exercise the carhet path cheaply.
PdrCurveFamily flat_family(RatId id) {
  PdrCurveFamily f;
  f.rat_id = id;
  f.cbr_levels = {0.0, 0.9};
  f.distances_m = {0.0, 40.0, 500.0};
  f.values = {1.0, 0.99, 0.0, 1.0, 0.99, 0.0};
  f.sample_counts.assign(6, 100);
  return f;
}

SimEnvironment environment() {
  SimEnvironment env;
  env.catalog = default_catalog();
  env.pathloss = default_pathloss();
  for (RatId r = 0; r < 5; ++r) env.pdr_families.push_back(flat_family(r));
  return env;
}

// Short, sparse scenario for the unit suite.
SimConfig small_config(SchemeKind kind, std::uint64_t seed = 1) {
  SimConfig c;
  c.mobility.road_length_m = 1000.0;
  c.mobility.density_veh_per_km = 20.0;
  c.sim_time_s = 12.0;
  c.warmup_s = 2.0;
  c.seed = seed;
  c.scheme = {kind, 1};
  c.app_profiles = uniform_app_profiles(0.2e6);
  return c;
}

}  // namespace

TEST_CASE("event queue pops in time order, FIFO on ties") {
  EventQueue q;
  q.push(2.0, EventType::evaluate, 1);
  q.push(1.0, EventType::evaluate, 2);
  q.push(2.0, EventType::evaluate, 3);
  q.push(1.0, EventType::evaluate, 4);
  std::vector<std::uint32_t> order;
  while (!q.empty()) order.push_back(q.pop().a);
  CHECK(order == std::vector<std::uint32_t>{2, 4, 1, 3});
  CHECK(q.now() == 2.0);
  CHECK(q.processed() == 4);
}

TEST_CASE("measure_cbr") {
  CHECK(measure_cbr({}, 0.0, 0.2) == 0.0);
  const std::vector<BusyInterval> full = {{-1.0, 5.0}};
  CHECK(measure_cbr(full, 0.0, 0.2) == 1.0);
  const std::vector<BusyInterval> one_ms = {{0.1, 0.101}};
  CHECK(measure_cbr(one_ms, 0.0, 0.2) == doctest::Approx(0.005));
  // Overlaps count once; parts outside the window are clipped.
  const std::vector<BusyInterval> mix = {{0.0, 0.05}, {0.04, 0.06}, {0.15, 0.25}, {-0.1, 0.01}};
  CHECK(measure_cbr(mix, 0.0, 0.2) == doctest::Approx((0.06 + 0.05) / 0.2));
  CHECK_THROWS_AS((void)measure_cbr(full, 0.0, 0.0), UsageError);
}

TEST_CASE("compute_satisfaction") {
  const AppRequirement app{1e6, 40.0, 0.9};
  std::vector<RxRecord> log;
  for (int k = 0; k < 10; ++k) {
    log.push_back({0, 1, 0.1 * k, true});
    log.push_back({0, 2, 0.1 * k, k != 3});
  }
  auto s = compute_satisfaction(log, 0, app, 0.0, 1.0);
  CHECK(s.has_receivers);
  CHECK(s.mean_ratio == doctest::Approx(0.95));
  CHECK(s.throughput_bps == doctest::Approx(0.95e6));
  CHECK(s.satisfied);

  // 9/10 and 8/10 average to 0.85.
  for (auto& r : log) {
    if (r.rx == 1 && r.time_s > 0.85) r.delivered = false;
    if (r.rx == 2 && r.time_s < 0.05) r.delivered = false;
  }
  s = compute_satisfaction(log, 0, app, 0.0, 1.0);
  CHECK(s.mean_ratio == doctest::Approx(0.85));
  CHECK_FALSE(s.satisfied);

  CHECK_FALSE(compute_satisfaction(log, 5, app, 0.0, 1.0).has_receivers);
  CHECK_FALSE(compute_satisfaction(log, 0, app, 2.0, 3.0).has_receivers);
}

TEST_CASE("RAT change intervals and quantiles") {
  const std::vector<RatChange> changes = {{0, 3.0, 0, 1}, {1, 4.0, 0, 2}, {0, 5.0, 1, 2}, {0, 9.0, 2, 0}};
  const auto tau = rat_change_intervals(changes, 3);
  CHECK(tau[0] == std::vector<double>{2.0, 4.0});
  CHECK(tau[1].empty());
  CHECK(tau[2].empty());
  CHECK_THROWS_AS((void)rat_change_intervals(changes, 1), UsageError);

  CHECK(std::isnan(quantile({}, 0.5)));
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == doctest::Approx(1.75));
  CHECK(quantile({1.0, 2.0}, 1.0) == 2.0);
  CHECK(quantile({7.0}, 0.95) == 7.0);
}

TEST_CASE("mobility: even spacing, opposing directions, deterministic") {
  MobilityConfig c;
  c.density_veh_per_km = 40.0;
  const auto m = generate_mobility(c, 9);
  REQUIRE(m.size() == 120);
  std::array<int, 4> per_lane{};
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& v = m.motion(i);
    ++per_lane[static_cast<std::size_t>(v.lane)];
    CHECK(v.direction == (v.lane < 2 ? 1 : -1));
    CHECK(v.speed_mps >= 0.8 * 100.0 / 3.6);
    CHECK(v.speed_mps <= 100.0 / 3.6);
    const Vec2 p = m.position(i, 37.5);
    CHECK(p.x >= 0.0);
    CHECK(p.x < c.road_length_m);
  }
  CHECK(per_lane == std::array<int, 4>{30, 30, 30, 30});

  // Opposing vehicles close in at the sum of their speeds.
  const auto metric = m.metric();
  std::size_t a = 0;
  std::size_t b = m.size() - 1;
  const double d0 = metric(m.position(a, 0.0), m.position(b, 0.0));
  const double d1 = metric(m.position(a, 0.01), m.position(b, 0.01));
  CHECK(std::abs(d1 - d0) == doctest::Approx(0.01 * (m.motion(a).speed_mps + m.motion(b).speed_mps)).epsilon(0.05));

  const auto again = generate_mobility(c, 9);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(again.position(i, 3.0) == m.position(i, 3.0));
  c.density_veh_per_km = 0.0;
  CHECK(generate_mobility(c, 1).size() == 0);
  c.lanes = 0;
  CHECK_THROWS_AS((void)generate_mobility(c, 1), ConfigError);
}

TEST_CASE("scheme parsing") {
  const auto cat = default_catalog();
  CHECK(parse_scheme("carhet", cat) == Scheme{SchemeKind::carhet, 0});
  CHECK(parse_scheme("random", cat) == Scheme{SchemeKind::random, 0});
  CHECK(parse_scheme("single_rat:3", cat) == Scheme{SchemeKind::single_rat, 3});
  CHECK(parse_scheme("single_rat:TVWS", cat) == Scheme{SchemeKind::single_rat, 4});
  CHECK(parse_scheme("single_rat:2", cat).to_string() == "single_rat:2");
  CHECK_THROWS_WITH_AS((void)parse_scheme("single_rat:9", cat), doctest::Contains("valid schemes"), ConfigError);
  CHECK_THROWS_AS((void)parse_scheme("best", cat), ConfigError);
}

TEST_CASE("configuration validation names the field") {
  const auto env = environment();
  auto expect = [&](SimConfig c, const char* field) {
    CHECK_THROWS_WITH_AS((void)run_simulation(c, env), doctest::Contains(field), ConfigError);
  };
  auto c = small_config(SchemeKind::random);
  c.sim_time_s = 1.0;
  expect(c, "sim_time_s");
  c = small_config(SchemeKind::random);
  c.carhet.t_meas_s = 0.0;
  expect(c, "t_meas_s");
  c = small_config(SchemeKind::random);
  c.app_profiles[0].fraction = 0.5;
  expect(c, "fractions");
  c = small_config(SchemeKind::single_rat);
  c.scheme.rat = 7;
  expect(c, "RAT id");
  c = small_config(SchemeKind::carhet);
  auto bare = env;
  bare.pdr_families.clear();
  CHECK_THROWS_AS((void)run_simulation(c, bare), ConfigError);
}

TEST_CASE("zero vehicles produce an empty report") {
  auto c = small_config(SchemeKind::carhet);
  c.mobility.density_veh_per_km = 0.0;
  const auto r = run_simulation(c, environment());
  CHECK(r.n_vehicles == 0);
  CHECK(r.changes.empty());
  CHECK(r.cbr.empty());
  const auto s = summarize(r);
  CHECK(s.vehicles_counted == 0);
  CHECK(std::isnan(s.mean_tau_s));
}

TEST_CASE("runs are bit-reproducible per seed") {
  const auto env = environment();
  for (auto kind : {SchemeKind::random, SchemeKind::carhet}) {
    const auto a = run_simulation(small_config(kind, 5), env);
    const auto b = run_simulation(small_config(kind, 5), env);
    CHECK(a == b);
    std::ostringstream x;
    std::ostringstream y;
    write_metrics_csv(x, a);
    write_metrics_csv(y, b);
    CHECK(x.str() == y.str());
    CHECK_FALSE(run_simulation(small_config(kind, 6), env) == a);
  }
}

TEST_CASE("two vehicles on one RAT sense their combined offered load") {
  const auto env = environment();
  SimConfig c;
  c.mobility.road_length_m = 60.0;
  c.mobility.lanes = 2;
  c.mobility.density_veh_per_km = 1000.0 / 30.0;  // one vehicle per lane
  c.sim_time_s = 22.0;
  c.warmup_s = 2.0;
  c.scheme = {SchemeKind::single_rat, 1};
  const auto r = run_simulation(c, env);
  REQUIRE(r.n_vehicles == 2);
  const double nt = 1e6 / (8.0 * 1024.0) * packet_airtime(env.catalog[1], 1024);
  double mean = 0.0;
  for (std::size_t v = 0; v < 2; ++v) {
    for (std::size_t w = 0; w < r.n_windows; ++w) mean += r.cbr_at(v, w, 1);
  }
  mean /= 2.0 * static_cast<double>(r.n_windows);
  // Own transmissions count as busy time, so each vehicle sees both loads.
  CHECK(mean == doctest::Approx(2.0 * nt).epsilon(0.02 / (2.0 * nt)));
  for (std::size_t v = 0; v < 2; ++v) {
    for (std::size_t w = 0; w < r.n_windows; ++w) CHECK(r.cbr_at(v, w, 0) == 0.0);
  }
  CHECK(r.counters.concurrent_tx == 0);
  CHECK(r.changes.empty());
  CHECK(summarize(r).percent_satisfied == 100.0);
}

TEST_CASE("random selection changes RAT with probability 4/5") {
  auto c = small_config(SchemeKind::random, 3);
  c.mobility.density_veh_per_km = 40.0;
  c.mobility.road_length_m = 3000.0;
  c.sim_time_s = 100.0;
  c.app_profiles = uniform_app_profiles(0.05e6);
  const auto r = run_simulation(c, environment());
  REQUIRE(r.counters.evaluations >= 10000);
  const double p = static_cast<double>(r.changes.size()) / static_cast<double>(r.counters.evaluations);
  CHECK(p == doctest::Approx(0.8).epsilon(0.02 / 0.8));
  CHECK(r.counters.concurrent_tx == 0);
}

TEST_CASE("carhet run keeps its invariants") {
  auto c = small_config(SchemeKind::carhet, 2);
  c.mobility.density_veh_per_km = 40.0;
  c.sim_time_s = 15.0;
  const auto r = run_simulation(c, environment());
  CHECK(r.counters.concurrent_tx == 0);
  CHECK(r.counters.preselect_violations == 0);
  CHECK(r.counters.cis_decode_errors == 0);
  CHECK(r.counters.evaluations > 0);

  // About one CIS per vehicle and T_meas.
  const double expected_cis = static_cast<double>(r.n_vehicles) * c.sim_time_s / c.carhet.t_meas_s;
  CHECK(static_cast<double>(r.counters.cis_frames) == doctest::Approx(expected_cis).epsilon(0.05));

  // Every CIS fits the row cap, and the sent signalling stays below the
  // worst-case bound for a neighborhood of all other vehicles.
  const double mean_bytes = static_cast<double>(r.counters.cis_bytes) / static_cast<double>(r.counters.cis_frames);
  CHECK(mean_bytes <= static_cast<double>(cis_encoded_bytes(kMaxCisEntries, 5)));
  CostInputs in;
  in.n1 = static_cast<std::int64_t>(r.n_vehicles) - 1;
  const double sent_bps = 8.0 * static_cast<double>(r.counters.cis_bytes) / c.sim_time_s /
                          static_cast<double>(r.n_vehicles);
  CHECK(sent_bps <= overhead_bps(in).bits_per_second);

  // Only changes appear in the log.
  for (const auto& ch : r.changes) CHECK(ch.from != ch.to);
}

TEST_CASE("summary and CSV writers") {
  const auto r = run_simulation(small_config(SchemeKind::random, 4), environment());
  const auto s = summarize(r);
  CHECK(s.cbr_quantiles.size() == 5);
  for (const auto& q : s.cbr_quantiles) {
    for (std::size_t i = 1; i < q.size(); ++i) CHECK(q[i] >= q[i - 1]);
  }
  CHECK(s.vehicles_counted <= r.n_vehicles);

  std::ostringstream m;
  write_metrics_csv(m, r);
  const std::string text = m.str();
  CHECK(text.rfind("vehicle_id,window_start_s,rat_id,cbr,throughput_bps,satisfied\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) ==
        1 + r.n_vehicles * r.n_windows * r.n_rat);

  std::ostringstream ch;
  write_changes_csv(ch, r);
  const std::string changes = ch.str();
  CHECK(static_cast<std::size_t>(std::count(changes.begin(), changes.end(), '\n')) == 1 + r.changes.size());

  std::ostringstream sum;
  write_summary_header(sum, 5);
  write_summary_row(sum, s);
  const auto lines = sum.str();
  const auto first = lines.substr(0, lines.find('\n'));
  const auto second = lines.substr(lines.find('\n') + 1);
  CHECK(std::count(first.begin(), first.end(), ',') == std::count(second.begin(), second.end(), ','));
}
