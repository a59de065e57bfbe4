// hetv2v command-line entry point.
#include <CLI11.hpp>

#include <iostream>

#include "hetv2v/cli/commands.hpp"
#include "hetv2v/error.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous V2V analysis and simulation toolkit"};
  app.set_version_flag("--version", std::string(hetv2v::kToolVersion));
  app.require_subcommand(1);

  std::string manifest;
  std::string out;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string scenario;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--manifest", manifest, "JSON run manifest (defaults when omitted)")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--jobs", jobs, "Concurrent calibration or grid cells")->check(CLI::PositiveNumber);
  };
  auto* capacity = app.add_subcommand("capacity", "Analytic capacity bounds (capacity.csv)");
  auto* calibrate = app.add_subcommand("calibrate", "Calibrate and cache PDR curve families");
  auto* simulate = app.add_subcommand("simulate", "Run the scheme x density simulation grid");
  auto* cost = app.add_subcommand("cost", "Computational and overhead cost sweep (cost.csv)");
  for (auto* sub : {capacity, calibrate, simulate, cost}) add_common(sub);
  simulate->add_option("--scenario", scenario, "Application requirements preset")
      ->check(CLI::IsMember({"uniform", "mixed"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    hetv2v::CliOverrides overrides;
    if (!out.empty()) overrides.out_dir = out;
    for (auto* sub : {capacity, calibrate, simulate, cost}) {
      if (*sub && sub->count("--seed") > 0) overrides.seed = seed;
    }
    if (!scenario.empty()) overrides.scenario = scenario;
    const auto m = hetv2v::load_manifest(manifest, overrides);

    if (*capacity) return hetv2v::cmd_capacity(m, std::cerr);
    if (*calibrate) return hetv2v::cmd_calibrate(m, jobs, std::cerr);
    if (*simulate) return hetv2v::cmd_simulate(m, jobs, std::cerr);
    if (*cost) return hetv2v::cmd_cost(m, std::cerr);
  } catch (const hetv2v::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
