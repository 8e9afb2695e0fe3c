#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "nhym/analysis.hpp"
#include "nhym/config.hpp"

namespace nhym {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitConverged = 0,
  kExitConfigError = 1,
  kExitValidationError = 2,
  kExitBlowup = 10,
  kExitMaxTime = 20,
};

int exit_code(FlowStatus s);

/// Canonical text of the pinned sign and normalisation conventions.
const std::string& convention_ledger();
/// 64-bit FNV-1a hash of convention_ledger(), as "fnv1a64:<16 hex digits>".
std::string convention_ledger_checksum();
/// Throws ValidationError unless `summary` carries the current ledger checksum.
void require_same_ledger(const nlohmann::json& summary);

Connection build_connection(const ConnectionConfig& c, const Geometry& geom);
/// Initial metric before normalisation.
MetricField build_initial_metric(const InitialMetricConfig& m, const Geometry& geom, int rank);

/// Column names of series.csv in order.
const std::vector<std::string>& series_columns();
void write_series_csv(const std::filesystem::path& path, const std::vector<FlowRow>& rows);

nlohmann::json to_json(const FlowRow& row);
nlohmann::json to_json(const BlowupReport& b, const MetricField& k);
nlohmann::json to_json(const SplittingReport& s);

struct ExperimentResult {
  FlowReport report;
  nlohmann::json summary;
  int exit_code = kExitMaxTime;
};

/// Runs the configured flow and writes series.csv, summary.json and the
/// requested snapshots into `out_dir` (created if missing).
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Rank-1 harmonic metric by a single Poisson solve of the conformal
/// correction, compared with the closed form when the preset has one.
nlohmann::json oracle_poisson(const ExperimentConfig& config);

}  // namespace nhym
