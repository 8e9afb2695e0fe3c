// nhymflow: batch driver for the harmonic-metric heat flow.
//
//   nhymflow run <config.json> [--out <dir>]
//   nhymflow check [--seed k] [--metrics m] [--flip-dc] [--report <file>] [--baseline <summary.json>]
//   nhymflow presets list
//   nhymflow oracle poisson <config.json>
//
// Exit codes: 0 converged / success, 10 blowup, 20 maxtime, 1 config error,
// 2 validation error. NHYM_THREADS overrides the OpenMP thread count.

#include <cstdlib>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "nhym/checks.hpp"
#include "nhym/experiment.hpp"
#include "nhym/presets.hpp"

namespace {

using nlohmann::json;

void apply_thread_override() {
  const char* env = std::getenv("NHYM_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw nhym::ConfigError("NHYM_THREADS must be a positive integer");
#ifdef _OPENMP
  omp_set_num_threads(static_cast<int>(n));
#endif
}

json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw nhym::ConfigError("cannot read " + path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw nhym::ConfigError(path + " is not valid JSON: " + e.what());
  }
}

int cmd_run(const std::string& config_path, const std::string& out) {
  const nhym::ExperimentConfig cfg = nhym::load_config(config_path);
  const std::string dir = out.empty() ? cfg.output.directory : out;
  const nhym::ExperimentResult res = nhym::run_experiment(cfg, dir);
  const json& s = res.summary;
  std::cout << "status " << s["status"].get<std::string>() << " t=" << s["t_final"]
            << " steps=" << s["steps"] << " sup_phi=" << s["terminal"]["sup_phi"] << "\n"
            << "artifacts in " << dir << "\n";
  return res.exit_code;
}

int cmd_check(std::uint64_t seed, int metrics, bool flip, const std::string& report,
              const std::string& baseline) {
  if (!baseline.empty()) nhym::require_same_ledger(read_json(baseline));
  nhym::SuiteOptions opts;
  opts.seed = seed;
  opts.metrics = metrics;
  opts.dc_sign = flip ? -1.0 : 1.0;
  const nhym::SuiteReport rep = nhym::check_suite(opts);
  for (const auto& r : rep.results)
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  value=" << r.value
              << " tol=" << r.tolerance << " (" << r.seconds << " s)\n";
  if (!report.empty()) {
    std::ofstream os(report);
    if (!os) throw nhym::Error("cannot write " + report);
    os << rep.to_json().dump(2) << "\n";
  }
  return rep.passed ? nhym::kExitConverged : nhym::kExitValidationError;
}

int cmd_presets() {
  for (const auto& p : nhym::preset_catalog())
    std::cout << p.name << "  (n=" << p.min_dim << (p.max_dim > p.min_dim ? "..2" : "") << ")  "
              << p.summary << "\n    defaults: " << p.defaults.dump() << "\n";
  return 0;
}

int cmd_oracle(const std::string& config_path) {
  const nhym::ExperimentConfig cfg = nhym::load_config(config_path);
  std::cout << nhym::oracle_poisson(cfg).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic-metric heat flow on NHYM bundles over flat tori"};
  app.require_subcommand(1);

  std::string config_path, out_dir, report, baseline;
  std::uint64_t seed = 1;
  int metrics = 3;
  bool flip = false;

  auto* run = app.add_subcommand("run", "integrate the flow for a config and write artifacts");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (overrides output.directory)");

  auto* check = app.add_subcommand("check", "calibration, identity and functional suites");
  check->add_option("--seed", seed, "seed for the random metrics");
  check->add_option("--metrics", metrics, "random metrics per identity preset")->check(CLI::PositiveNumber);
  check->add_flag("--flip-dc", flip, "negative control: flip the sign of d^c in the calibration");
  check->add_option("--report", report, "write the machine-readable report here");
  check->add_option("--baseline", baseline, "summary.json whose convention ledger must match");

  auto* presets = app.add_subcommand("presets", "preset catalog");
  presets->add_subcommand("list", "list presets and default parameters");
  presets->require_subcommand(1);

  auto* oracle = app.add_subcommand("oracle", "independent oracles");
  auto* poisson = oracle->add_subcommand("poisson", "rank-1 harmonic metric by one Poisson solve");
  poisson->add_option("config", config_path, "experiment config (JSON)")->required();
  oracle->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nhym::kExitConfigError;
  }

  try {
    apply_thread_override();
    if (*run) return cmd_run(config_path, out_dir);
    if (*check) return cmd_check(seed, metrics, flip, report, baseline);
    if (*presets) return cmd_presets();
    if (*poisson) return cmd_oracle(config_path);
  } catch (const nhym::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return nhym::kExitConfigError;
  } catch (const nhym::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return nhym::kExitValidationError;
  } catch (const nhym::GeometryError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return nhym::kExitValidationError;
  } catch (const nhym::IntegrationError& e) {
    std::cerr << "integration error: " << e.what() << "\n";
    return nhym::kExitValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nhym::kExitConfigError;
  }
  return nhym::kExitConfigError;
}
