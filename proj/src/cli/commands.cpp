#include "hetv2v/cli/commands.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "hetv2v/error.hpp"
#include "hetv2v/sim/seeding.hpp"

namespace hetv2v {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path cache_dir() {
  if (const char* d = std::getenv("HETV2V_CACHE_DIR"); d != nullptr && *d != '\0') return d;
  if (const char* d = std::getenv("XDG_CACHE_HOME"); d != nullptr && *d != '\0') return fs::path(d) / "hetv2v";
  if (const char* d = std::getenv("HOME"); d != nullptr && *d != '\0') return fs::path(d) / ".cache" / "hetv2v";
  return ".hetv2v-cache";
}

std::string pdr_cache_key(const RatProfile& profile, const PathlossParams& pathloss,
                          const CalibrationConfig& calibration) {
  json jc = calibration;
  jc.erase("seed");
  return "profile=" + hex64(fnv1a64(json(profile).dump())) + " pathloss=" + hex64(fnv1a64(json(pathloss).dump())) +
         " grid=" + hex64(fnv1a64(jc.dump())) + " seed=" + std::to_string(calibration.seed);
}

fs::path pdr_cache_path(const fs::path& dir, const RatProfile& profile, const std::string& key) {
  return dir / ("pdr_rat" + std::to_string(profile.id) + "_" + hex64(fnv1a64(key)) + ".csv");
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body) {
  const unsigned workers = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

CalibrationReport ensure_pdr_families(const RunManifest& m, unsigned jobs, std::ostream& log) {
  const fs::path dir = cache_dir();
  CalibrationReport report;
  report.families.resize(m.catalog.size());
  std::vector<std::size_t> missing;
  std::mutex log_mutex;

  for (const auto& p : m.catalog) {
    const std::string key = pdr_cache_key(p, m.pathloss, m.calibration);
    const fs::path path = pdr_cache_path(dir, p, key);
    if (!fs::exists(path)) {
      missing.push_back(static_cast<std::size_t>(p.id));
      continue;
    }
    try {
      std::ifstream in(path);
      std::string stored_key;
      auto family = read_pdr_csv(in, &stored_key);
      if (stored_key != key || family.rat_id != p.id) throw ConfigError("cache key mismatch");
      report.families[static_cast<std::size_t>(p.id)] = std::move(family);
      ++report.cache_hits;
    } catch (const ConfigError& e) {
      log << "warning: cached PDR family " << path.string() << " is invalid (" << e.what()
          << "); recalibrating\n";
      missing.push_back(static_cast<std::size_t>(p.id));
    }
  }

  parallel_for(missing.size(), jobs, [&](std::size_t i) {
    const auto& p = m.catalog[missing[i]];
    {
      const std::lock_guard lock(log_mutex);
      log << "calibrating PDR family for " << p.name << "\n";
    }
    auto family = calibrate_pdr(p, m.pathloss, m.calibration);
    const std::string key = pdr_cache_key(p, m.pathloss, m.calibration);
    std::ostringstream csv;
    write_pdr_csv(csv, family, key);
    write_file_atomic(pdr_cache_path(dir, p, key), csv.str());
    report.families[missing[i]] = std::move(family);
  });
  report.calibrated = missing.size();
  return report;
}

int cmd_capacity(const RunManifest& m, std::ostream& log) {
  std::vector<PsrCurve> psr;
  for (const auto& p : m.catalog) psr.push_back(derive_psr(p, m.pathloss));
  const auto rows = capacity_sweep(m.catalog, psr, m.capacity_sweep, m.capacity_cbr_max, m.capacity_payload_bytes);
  std::ostringstream csv;
  csv << provenance_header(m) << '\n';
  write_capacity_csv(csv, rows);
  const fs::path path = m.output_dir / "capacity.csv";
  write_file_atomic(path, csv.str());
  log << "wrote " << rows.size() << " rows to " << path.string() << "\n";
  return 0;
}

int cmd_calibrate(const RunManifest& m, unsigned jobs, std::ostream& log) {
  const auto report = ensure_pdr_families(m, jobs, log);
  log << "PDR families in " << cache_dir().string() << ": " << report.cache_hits << " cached, "
      << report.calibrated << " calibrated\n";
  return 0;
}

namespace {

std::string cell_name(const Scheme& s, double density, int rep) {
  std::string name = s.to_string();
  for (auto& c : name) {
    if (c == ':') c = '-';
  }
  std::ostringstream os;
  os << name << "_d" << density << "_rep" << rep;
  return os.str();
}

}  // namespace

int cmd_simulate(const RunManifest& m, unsigned jobs, std::ostream& log) {
  SimEnvironment env{m.catalog, m.pathloss, {}};
  const bool needs_curves = std::any_of(m.schemes.begin(), m.schemes.end(),
                                        [](const Scheme& s) { return s.kind == SchemeKind::carhet; });
  if (needs_curves) env.pdr_families = ensure_pdr_families(m, jobs, log).families;

  struct Cell {
    Scheme scheme;
    double density;
    int rep;
  };
  std::vector<Cell> cells;
  for (const auto& s : m.schemes) {
    for (const double d : m.densities) {
      for (int r = 0; r < m.repetitions; ++r) cells.push_back({s, d, r});
    }
  }
  std::vector<RunSummary> summaries(cells.size());
  std::mutex log_mutex;
  const std::string header = provenance_header(m) + '\n';

  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    const Cell& cell = cells[i];
    SimConfig cfg = m.sim;
    cfg.scheme = cell.scheme;
    cfg.mobility.density_veh_per_km = cell.density;
    // Schemes share the seed of a (density, repetition) cell so they see the same traffic.
    cfg.seed = derive_seed(m.seed, {static_cast<std::uint64_t>(std::llround(cell.density * 1000.0)),
                                    static_cast<std::uint64_t>(cell.rep)});
    const MetricsReport report = run_simulation(cfg, env);
    const RunSummary summary = summarize(report);

    const fs::path dir = m.output_dir / cell_name(cell.scheme, cell.density, cell.rep);
    std::ostringstream metrics;
    std::ostringstream changes;
    std::ostringstream sum;
    metrics << header;
    write_metrics_csv(metrics, report);
    changes << header;
    write_changes_csv(changes, report);
    sum << header;
    write_summary_header(sum, report.n_rat);
    write_summary_row(sum, summary);
    write_file_atomic(dir / "metrics.csv", metrics.str());
    write_file_atomic(dir / "changes.csv", changes.str());
    write_file_atomic(dir / "summary.csv", sum.str());
    summaries[i] = summary;
    const std::lock_guard lock(log_mutex);
    log << dir.string() << ": " << summary.percent_satisfied << "% satisfied\n";
  });

  std::ostringstream grid;
  grid << header;
  write_summary_header(grid, m.catalog.size());
  for (const auto& s : summaries) write_summary_row(grid, s);
  write_file_atomic(m.output_dir / "summary.csv", grid.str());
  log << "wrote " << cells.size() << " runs to " << m.output_dir.string() << "\n";
  return 0;
}

int cmd_cost(const RunManifest& m, std::ostream& log) {
  const auto rows = cost_sweep(m.cost, m.cost_n_max, m.cost_cpu_ghz);
  std::ostringstream csv;
  csv << provenance_header(m) << '\n';
  write_cost_csv(csv, rows);
  const fs::path path = m.output_dir / "cost.csv";
  write_file_atomic(path, csv.str());
  log << "wrote " << rows.size() << " rows to " << path.string() << "\n";
  return 0;
}

}  // namespace hetv2v
