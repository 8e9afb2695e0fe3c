#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "nhym/flow.hpp"

namespace nhym {

/// Raised for configuration documents that violate the schema
/// (docs/config.schema.json). Maps to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct GeometryConfig {
  int n = 1;
  std::vector<int> sizes{32, 32};
  std::vector<Real> periods{1.0, 1.0};
};

struct ConnectionConfig {
  std::string preset;         ///< empty when `file` is used
  nlohmann::json params;      ///< preset parameter overrides (object or null)
  std::string file;           ///< snapshot with components dz1, dzbar1, ...
};

struct InitialMetricConfig {
  std::string kind = "identity";  ///< identity | inline | conformal | random
  std::string file;               ///< inline: snapshot with component H
  std::uint64_t seed = 1;
  Real amplitude = 0.3;
  int max_mode = 1;
};

struct OutputConfig {
  std::string directory = "out";
  bool snapshot_initial = false;
  bool snapshot_final = true;
  bool monitor = true;  ///< evaluate flow monitors at recorded rows
};

struct AnalysisConfig {
  bool blowup = true;  ///< analyse the terminal metric when the run does not converge
  std::optional<Mat> splitting_vectors;  ///< columns spanning S for the splitting check
  Real min_gap = 1e-3;
};

struct ExperimentConfig {
  std::string name = "experiment";
  GeometryConfig geometry;
  ConnectionConfig connection;
  InitialMetricConfig initial_metric;
  FlowParams flow;
  OutputConfig output;
  AnalysisConfig analysis;
  std::uint64_t seed = 1;
  nlohmann::json source;  ///< the document as given
};

/// Validates `doc` against the schema and fills defaults. Relative file paths
/// are resolved against `base_dir`. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir = ".");

/// Reads and parses a JSON config file. Throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

Geometry build_geometry(const GeometryConfig& g);

}  // namespace nhym
