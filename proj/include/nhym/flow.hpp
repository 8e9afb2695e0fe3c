#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nhym/functionals.hpp"

namespace nhym {

struct FlowParams {
  Real dt_safety = 0.2;
  Real t_max = 50.0;
  Real tolerance = 1e-8;          ///< convergence threshold on sup |Phi|_H
  Real blowup_threshold = 20.0;   ///< on sup |s|_K, s = log(H0^{-1} H)
  int record_stride = 50;         ///< steps between recorded rows
  std::optional<Real> dt;         ///< overrides the stability heuristic
  bool normalize = true;          ///< run normalize_initial before integrating
  bool adaptive = true;           ///< halve on monitor trips, double after clean runs
  int doubling_after = 50;
  Real monitor_tolerance = 1e-6;  ///< relative slack of the sup |Phi| monitor
  bool functionals = true;        ///< evaluate energy and Donaldson columns

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

/// H(t) with the quantities of the current metric cached.
struct FlowState {
  Real t = 0.0;
  MetricField h;
  MetricField k;  ///< reference (initial) metric
  Decomposition dec;
  EndField phi;
  Real sup_phi = 0.0;
  Real dt_used = 0.0;
  long steps = 0;
  int halvings = 0;
};

/// One row of the time series.
struct FlowRow {
  Real t = 0.0;
  Real dt = 0.0;
  Real sup_phi = 0.0;
  Real l2_phi = 0.0;
  Real donaldson = 0.0;
  Real energy = 0.0;
  Real sigma0 = 0.0;  ///< sup over the torus of sigma(H0, H(t))
  Real s_sup = 0.0;
  Real s_l1 = 0.0;
  Real det_res = 0.0;  ///< sup |log det(H0^{-1} H)|
  bool phi_monotone_flag = false;
};

enum class FlowStatus { Converged, Blowup, MaxTime };
std::string to_string(FlowStatus s);

struct MonitorSummary {
  long steps = 0;
  int halvings = 0;
  int monitor_trips = 0;
  Real max_phi_increase = 0.0;  ///< largest relative per-step increase of sup |Phi|
  Real normalization_residual = 0.0;
};

struct FlowReport {
  FlowStatus status = FlowStatus::MaxTime;
  std::vector<FlowRow> rows;
  FlowState final_state;
  MonitorSummary summary;
};

/// Pointwise |Phi|_H and its sup.
ScalarField phi_norm(const FlowState& s);

/// Builds the cached state for metric h with reference k at time t.
FlowState make_state(const Connection& conn, const MetricField& h, const MetricField& k,
                     Real t = 0.0);

/// e^{2u} H0 with tr Phi = 0, by iterated Poisson correction. Throws
/// ValidationError if the residual stays above 1e-8.
MetricField normalize_initial(const Connection& conn, const MetricField& h0,
                              Real* residual = nullptr);

/// One exponential Euler step H exp(dt Phi(H)). Throws IntegrationError on
/// non-finite fields.
FlowState step(const Connection& conn, const FlowState& state, Real dt);

/// Stability heuristic dt_safety * h_min^2 / (4n).
Real default_timestep(const TorusGeometry& g, Real dt_safety);

/// Series row for a state.
FlowRow make_row(const Connection& conn, const FlowState& state, bool with_functionals = true);

/// Called at every recorded row with the state one step earlier (equal to
/// `cur` for the initial row) and the current state.
using FlowObserver =
    std::function<void(const FlowState& prev, const FlowState& cur, const FlowRow& row)>;

/// Integrates until convergence, blow-up or t_max. Requires an NHYM certificate.
FlowReport run(const Connection& conn, const MetricField& h0, const FlowParams& params,
               const FlowObserver& observer = {});

}  // namespace nhym
