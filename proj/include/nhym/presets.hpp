#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "nhym/connection.hpp"

namespace nhym {

struct PresetInfo {
  std::string name;
  std::string summary;
  int min_dim = 1;          ///< smallest complex dimension supported
  int max_dim = 2;
  nlohmann::json defaults;  ///< parameters used when the config gives none
};

/// The preset catalog in listing order.
const std::vector<PresetInfo>& preset_catalog();

/// Builds and certifies a preset on `geom`. `params` overrides the defaults
/// key by key; unknown keys are rejected. Throws ValidationError for unknown
/// names, bad parameters, or connections that fail validate_nhym.
Connection preset(const std::string& name, const nlohmann::json& params, const Geometry& geom);

/// Closed-form harmonic metric of a scalar preset (scalar_exact or
/// scalar_character), normalised to unit geometric mean. Throws
/// ValidationError for other presets.
MetricField exact_harmonic_metric(const std::string& name, const nlohmann::json& params,
                                  const Geometry& geom);

/// Complex matrix from JSON: rows of entries, each a number or a [re, im]
/// pair. Throws ValidationError on ragged or non-numeric input.
Mat parse_matrix(const nlohmann::json& j);
nlohmann::json matrix_to_json(const Mat& m);
Complex parse_complex(const nlohmann::json& j);

}  // namespace nhym
