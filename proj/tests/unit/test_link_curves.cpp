#include <doctest.h>

#include <random>
#include <sstream>

#include "hetv2v/error.hpp"
#include "hetv2v/link_curves.hpp"
#include "oracles.hpp"

using namespace hetv2v;

namespace {

PdrCurveFamily two_by_two() {
  PdrCurveFamily f;
  f.rat_id = 3;
  f.cbr_levels = {0.2, 0.3};
  f.distances_m = {40.0, 50.0};
  f.values = {0.9, 0.8, 0.7, 0.5};
  f.sample_counts = {10, 10, 10, 10};
  return f;
}

// Small grid kept fast enough for the unit suite.
CalibrationConfig small_grid() {
  CalibrationConfig c;
  c.cbr_levels = {0.0, 0.3, 0.6};
  c.distances_m = {10.0, 40.0, 100.0, 200.0, 400.0};
  c.trials = 600;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("pdr_lookup interpolation and clamping") {
  const auto f = two_by_two();
  CHECK(pdr_lookup(f, 0.2, 40.0) == 0.9);
  CHECK(pdr_lookup(f, 0.3, 50.0) == 0.5);
  CHECK(pdr_lookup(f, 0.25, 40.0) == doctest::Approx(0.8));
  CHECK(pdr_lookup(f, 0.2, 45.0) == doctest::Approx(0.85));
  CHECK(pdr_lookup(f, 0.25, 45.0) == doctest::Approx((0.9 + 0.8 + 0.7 + 0.5) / 4.0));
  CHECK(pdr_lookup(f, 1.0, 40.0) == 0.7);
  CHECK(pdr_lookup(f, 0.0, 0.0) == 0.9);
  CHECK(pdr_lookup(f, 1.0, 1e6) == 0.5);
  CHECK_THROWS_AS((void)pdr_lookup(PdrCurveFamily{}, 0.1, 10.0), UsageError);
}

TEST_CASE("pdr_lookup stays in [0, 1] and is continuous") {
  const auto f = two_by_two();
  double prev = pdr_lookup(f, 0.0, 30.0);
  for (double c = 0.0; c <= 1.0; c += 1e-3) {
    const double v = pdr_lookup(f, c, 45.0);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (c > 0.0) CHECK(std::abs(v - prev) < 5e-3);
    prev = v;
  }
}

TEST_CASE("weighted isotonic regression") {
  CHECK(isotonic_nonincreasing({3, 2, 1}, {1, 1, 1}) == std::vector<double>{3, 2, 1});
  CHECK(isotonic_nonincreasing({1, 3}, {1, 1}) == std::vector<double>{2, 2});
  CHECK(isotonic_nonincreasing({1, 3}, {3, 1}) == std::vector<double>{1.5, 1.5});
  const auto fit = isotonic_nonincreasing({0.9, 0.95, 0.7, 0.8, 0.2}, {1, 1, 1, 1, 1});
  CHECK(fit[0] == doctest::Approx(0.925));
  CHECK(fit[1] == doctest::Approx(0.925));
  CHECK(fit[2] == doctest::Approx(0.75));
  CHECK(fit[3] == doctest::Approx(0.75));
  CHECK(fit[4] == doctest::Approx(0.2));
  CHECK_THROWS_AS((void)isotonic_nonincreasing({1.0}, {}), UsageError);
}

TEST_CASE("smoothing makes random families monotone in both axes") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    PdrCurveFamily f;
    f.cbr_levels = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    for (int d = 0; d <= 500; d += 10) f.distances_m.push_back(d);
    for (std::size_t l = 0; l < f.cbr_levels.size(); ++l) {
      for (std::size_t d = 0; d < f.distances_m.size(); ++d) {
        // Roughly monotone surface plus noise.
        const double base = (1.0 - 0.05 * static_cast<double>(l)) * (1.0 - static_cast<double>(d) / 60.0);
        f.values.push_back(std::clamp(base + 0.2 * (u(rng) - 0.5), 0.0, 1.0));
        f.sample_counts.push_back(static_cast<std::uint32_t>(1 + rng() % 2000));
      }
    }
    smooth_monotone(f);
    for (std::size_t l = 0; l < f.cbr_levels.size(); ++l) {
      for (std::size_t d = 0; d < f.distances_m.size(); ++d) {
        CHECK(f.at(l, d) >= 0.0);
        CHECK(f.at(l, d) <= 1.0);
        if (d > 0) CHECK(f.at(l, d) <= f.at(l, d - 1));
        if (l > 0) CHECK(f.at(l, d) <= f.at(l - 1, d));
      }
    }
  }
}

TEST_CASE("PDR CSV round trip is bit exact") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PdrCurveFamily f;
  f.rat_id = 2;
  f.cbr_levels = {0.0, 0.1, 0.35};
  f.distances_m = {0.0, 12.5, 40.0, 480.0};
  for (int i = 0; i < 12; ++i) {
    f.values.push_back(u(rng));
    f.sample_counts.push_back(static_cast<std::uint32_t>(rng() % 5000));
  }
  std::stringstream ss;
  write_pdr_csv(ss, f, "key=abc");
  std::string key;
  const auto back = read_pdr_csv(ss, &key);
  CHECK(back == f);
  CHECK(key == "key=abc");
}

TEST_CASE("PDR CSV rejects malformed content") {
  std::stringstream good;
  write_pdr_csv(good, two_by_two(), "k");
  const std::string text = good.str();

  auto reject = [](const std::string& s) {
    std::istringstream in(s);
    CHECK_THROWS_AS((void)read_pdr_csv(in), ConfigError);
  };
  reject("");
  reject("garbage\n");
  reject(text.substr(0, text.size() - 10));  // truncated
  std::string bad = text;
  bad.replace(bad.find("0.90000000000000002"), 19, "1.5");
  reject(bad);
  bad = text;
  bad.replace(bad.find("rows=4"), 6, "rows=5");
  reject(bad);
  reject(text + "3,0.2,40,0.9,10\n");  // duplicate cell
  reject(text.substr(0, text.rfind('\n', text.size() - 2) + 1) + "3,0.3,60,0.5,10\n");  // hole in grid
}

TEST_CASE("calibration at zero load matches the propagation-only reception probability") {
  const auto cat = default_catalog();
  const auto pl = default_pathloss();
  auto cfg = small_grid();
  cfg.cbr_levels = {0.0};
  // Short-range RAT: the other probes are out of reach of receivers up to
  // 200 m, so only propagation limits delivery there.
  const auto& p = cat[1];
  const auto f = calibrate_pdr(p, pl, cfg);
  for (std::size_t d = 0; d < f.distances_m.size(); ++d) {
    const double dist = std::max(f.distances_m[d], 1.0);
    const double mean_power = p.tx_power_dbm -
                              oracle::pathloss_db(22.7, 41.0, 2.7, 5.0, 66.6, 40.0, p.carrier_freq_ghz, dist);
    const double floor = oracle::q_tail((p.rx_threshold_dbm - mean_power) / 3.0);
    const double tol = std::max(0.02, 3.0 * std::sqrt(floor * (1.0 - floor) / f.samples(0, d)));
    INFO("d=" << dist);
    CHECK(f.samples(0, d) >= cfg.trials);
    CHECK(f.at(0, d) <= floor + tol);
    if (dist <= 200.0) CHECK(f.at(0, d) >= floor - tol);
  }
}

TEST_CASE("calibration is reproducible, monotone and load-sensitive") {
  const auto cat = default_catalog();
  const auto pl = default_pathloss();
  const auto cfg = small_grid();
  const auto a = calibrate_pdr(cat[4], pl, cfg);
  const auto b = calibrate_pdr(cat[4], pl, cfg);
  CHECK(a == b);
  REQUIRE(a.cbr_levels.size() == 3);
  for (std::size_t d = 0; d < a.distances_m.size(); ++d) {
    CHECK(a.at(2, d) <= a.at(0, d) + 0.03);
    if (d > 0) CHECK(a.at(1, d) <= a.at(1, d - 1));
  }
  // Interference costs deliveries at the target distance.
  CHECK(a.at(2, 1) < a.at(0, 1));

  auto other = cfg;
  other.seed = 8;
  CHECK(calibrate_pdr(cat[4], pl, other) != a);
}

TEST_CASE("the calibration scene reaches its target loads") {
  const auto cat = default_catalog();
  auto cfg = small_grid();
  cfg.cbr_levels = {0.5};
  cfg.trials = 60;
  // Every level of a successful calibration was within tolerance; measure one directly.
  const auto f = calibrate_pdr(cat[1], default_pathloss(), cfg);
  CHECK(f.cbr_levels == std::vector<double>{0.5});
  const auto idle = run_calibration_scene(cat[1], default_pathloss(), cfg, 0.0, 1.0, 3);
  CHECK(idle.measured_cbr < 0.01);
}

TEST_CASE("unreachable loads raise a calibration error naming the level") {
  auto cfg = small_grid();
  cfg.cbr_levels = {0.0, 0.9};
  cfg.background_density_veh_per_km = 1.0;
  cfg.trials = 20;
  CHECK_THROWS_WITH_AS((void)calibrate_pdr(default_catalog()[3], default_pathloss(), cfg),
                       doctest::Contains("0.9"), CalibrationError);

  cfg = small_grid();
  cfg.cbr_levels = {0.5, 0.4};
  CHECK_THROWS_AS((void)calibrate_pdr(default_catalog()[3], default_pathloss(), cfg), ConfigError);
  cfg = small_grid();
  cfg.trials = 0;
  CHECK_THROWS_AS((void)calibrate_pdr(default_catalog()[3], default_pathloss(), cfg), ConfigError);
}
