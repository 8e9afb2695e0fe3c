#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "nhym/connection.hpp"

namespace nhym {

/// Outcome of one residual test against its pinned tolerance.
struct CheckResult {
  std::string name;
  Real value = 0.0;
  Real tolerance = 0.0;
  bool passed = false;
  Real seconds = 0.0;
  nlohmann::json details;
};

nlohmann::json to_json(const CheckResult& r);

/// Laplacian calibration: sup over plane waves exp(i k.x), |k_a| <= 3, of
/// |sqrt(-1) Lambda d d^c f - Euclidean Laplacian f| / (1 + |k|^2), with
/// d^c = dc_sign (dbar - d). Passes below 1e-10 for dc_sign = +1.
CheckResult calibration_check(int n, int size, Real dc_sign = 1.0);

/// Identity residuals of check_identities over `metrics` random metric pairs
/// (H and the second metric of the transformation law) for one preset.
CheckResult identity_check(const std::string& preset_name, int n, int size, int metrics,
                           std::uint64_t seed, Real amplitude = 0.3, Real tolerance = 1e-8);

/// Donaldson functional properties on nonnormal_simple (n = 1, N = 32):
/// closed form vs 64-step Simpson path, cocycle, and first variation.
std::vector<CheckResult> functional_checks(std::uint64_t seed, int triples = 3);

struct SuiteOptions {
  std::uint64_t seed = 1;
  Real dc_sign = 1.0;      ///< -1 is the negative control
  int metrics = 3;         ///< random metrics per identity preset
  int n2_size = 16;        ///< grid size per axis for the n = 2 identity preset
  Real n2_amplitude = 0.25; ///< random-metric amplitude for the n = 2 preset
};

/// Calibration, identity and functional suites. `passed` is false when any
/// residual breaches its tolerance.
struct SuiteReport {
  std::vector<CheckResult> results;
  bool passed = true;
  nlohmann::json to_json() const;
};

SuiteReport check_suite(const SuiteOptions& opts);

}  // namespace nhym
