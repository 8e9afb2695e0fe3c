#pragma once

#include <string>
#include <vector>

#include "nhym/flow.hpp"

namespace nhym {

/// Finite-difference residuals of the flow identities between two states one
/// step apart. The time derivative is a forward difference along the discrete
/// trajectory, so the heat residuals of |Phi|^2 are O(dt) and vanish only as
/// dt -> 0.
struct MonitorRecord {
  Real t = 0.0;
  Real dt = 0.0;
  Real tr_phi_heat = 0.0;     ///< sup |(d_t - Laplacian) tr Phi|
  Real tr_phi_scale = 1.0;    ///< 1 + sup |Laplacian tr Phi|, the tolerance scale of tr_phi_heat
  /// sup |(d_t - Laplacian)|Phi|^2 + sqrt(-1) Lambda tr(D Phi ^ D^c_H Phi - D^c_H Phi ^ D Phi)|
  Real phi2_heat = 0.0;
  /// max over nodes of (d_t - Laplacian)|Phi|^2 + 2|D Phi|^2_H, the pointwise norm bound
  Real phi2_ineq = 0.0;
  Real phi2_scale = 1.0;      ///< 1 + sup |Phi|^2, the tolerance scale of phi2_heat
  Real sup_phi_delta = 0.0;   ///< sup|Phi|(cur) - sup|Phi|(prev)
  Real det_res = 0.0;         ///< sup |log det(H0^{-1} H)|
  Real sigma_slack = 0.0;     ///< 2r(e^{Ct}-1)(1+1e-3) - sup sigma(H0, H); >= 0 expected
  Real dmdt_fd = 0.0;         ///< (M(cur) - M(prev)) / dt
  Real dmdt_predicted = 0.0;  ///< -integral |Phi|^2, averaged over the two states
  Real dmdt_mismatch = 0.0;   ///< |fd - predicted| / |predicted|
  bool dmdt_resolved = false; ///< the change in M is well above round-off
  std::vector<std::string> flags;
};

struct MonitorTolerances {
  Real tr_phi_heat = 1e-6;
  Real phi2_heat = 0.25;  ///< relative; covers the O(dt) error of the forward difference at dt_safety 0.2
  Real det = 1e-9;
  bool check_det = true;  ///< det is preserved only from a normalised start (tr Phi = 0)
  Real phi_increase = 1e-6;
  Real dmdt = 1e-2;
};

/// Residuals between `prev` and `cur` (consecutive steps of one flow).
/// `phi0_sup` is sup |Phi(H0)|, the constant of the growth bound.
MonitorRecord monitor(const Connection& conn, const FlowState& prev, const FlowState& cur,
                      Real phi0_sup, const MonitorTolerances& tol = {});

/// Pointwise terms of the Bochner identity for |psi_H|^2 on a flat torus, in
/// real axis components. Two-form norms sum over all ordered pairs of axes.
struct BochnerTerms {
  ScalarField psi2;      ///< |psi|^2
  ScalarField grad2;     ///< |nabla psi|^2, nabla = D_H componentwise
  ScalarField wedge2;    ///< |psi ^ psi|^2
  ScalarField coupling;  ///< <F^+, psi ^ psi>, F^+ = D_H^2 + psi ^ psi
};
BochnerTerms bochner_terms(const Decomposition& d);

/// sup |(d_t - Laplacian)|psi|^2 + 2|nabla psi|^2 + 2|psi^psi|^2 - 2<F^+, psi^psi>|
/// at the middle state, with a central difference in time. The three states
/// must be equally spaced in time (throws ValidationError otherwise).
Real bochner_residual(const Connection& conn, const FlowState& a, const FlowState& b,
                      const FlowState& c);

/// One extracted projector with its residuals.
struct ProjectorReport {
  int rank = 0;              ///< rank of the image (number of smallest eigenvalues)
  EndField pi;
  Real idempotency = 0.0;    ///< sup |pi^2 - pi|
  Real self_adjointness = 0.0; ///< sup |K pi - pi^dagger K|
  Real invariance = 0.0;     ///< L2 norm of (Id - pi) D pi
};

struct BlowupReport {
  Real l1_norm = 0.0;           ///< integral of |s|_K
  EndField u;                   ///< s / l1_norm
  Real u_l1 = 0.0;              ///< integral of |u|_K (1 by construction)
  Real tr_u_integral = 0.0;
  Eigen::MatrixXd eigenvalues;  ///< rank x nodes, ascending
  std::vector<Real> eigen_mean;
  std::vector<Real> eigen_std;  ///< spatial standard deviation per eigenvalue
  std::vector<Real> eigen_std_relative;  ///< eigen_std over the mean spectral gap
  std::vector<Real> gap_min;    ///< min over nodes of lambda_{a+1} - lambda_a
  std::vector<ProjectorReport> projectors;
  std::vector<int> candidate_ranks;
  std::string note;
};

/// L1-normalised log-metric u = s/|s|_{L1}, s = log(K^{-1}H), its pointwise
/// spectrum, and the projectors across every gap whose minimum exceeds `min_gap`.
BlowupReport blowup_analysis(const Connection& conn, const MetricField& k, const MetricField& h,
                             Real min_gap = 1e-3);

/// sup |pi - P| where P is the K-orthogonal projector onto the span of the
/// given constant vectors (columns). Zero iff image(pi) equals that span.
Real subspace_alignment(const MetricField& k, const EndField& pi, const Mat& vectors);

struct SplittingReport {
  OneForm beta;             ///< -1/2 pi (D pi)(Id - pi)
  Real beta_l2 = 0.0;
  Real invariance = 0.0;    ///< L2 norm of (Id - pi) D pi (zero for an invariant S)
  Real trace_term = 0.0;    ///< integral tr(pi sqrt(-1) Lambda G_H)
  Real block_residual = 0.0;///< trace_term + |beta|_{L2}^2
};

/// Second fundamental form of the H-orthogonal splitting S + Q with S the
/// image of pi. Throws ValidationError unless pi is an H-self-adjoint projector.
SplittingReport splitting_check(const Connection& conn, const MetricField& h, const EndField& pi,
                                Real tol = 1e-8);

/// H-orthogonal projector onto the span of the given constant vectors.
EndField orthogonal_projector(const MetricField& h, const Mat& vectors);

/// Pointwise terms comparing two metrics H, K with h = K^{-1} H.
struct TwoMetricReport {
  Real harmonic_residual = 0.0;  ///< sup |Lap sigma - |h^{-1/2}Dh|^2_K - |h^{1/2}Dh^{-1}|^2_H|
  Real general_residual = 0.0;   ///< same with the tr(h (Phi_H - Phi_K)) terms restored
  Real min_norm_terms = 0.0;     ///< min over nodes of the two norm terms (>= 0 expected)
  Real log_inequality_slack = 0.0; ///< min of Lap log(tr h + tr h^{-1}) + |Phi_H|_H + |Phi_K|_K
};
TwoMetricReport two_metric_check(const Connection& conn, const MetricField& h,
                                 const MetricField& k);

/// sup over the torus of sigma(H, K).
Real sup_sigma(const MetricField& h, const MetricField& k);

}  // namespace nhym
