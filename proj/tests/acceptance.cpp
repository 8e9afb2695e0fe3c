// Acceptance criteria 1-10. Each criterion prints one line
//
//   criterion <k> PASS|FAIL  <measured values>  (<seconds> s)
//
// and the process exits nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "nhym/analysis.hpp"
#include "nhym/checks.hpp"
#include "nhym/presets.hpp"
#include "nhym/random_fields.hpp"

using namespace nhym;

namespace {

using Clock = std::chrono::steady_clock;

// Pinned tolerances.
constexpr Real kCalibrationTol = 1e-10;
constexpr Real kCalibrationSeconds = 1.0;
constexpr Real kIdentityTol = 1e-8;
constexpr Real kIdentitySeconds = 30.0;
constexpr Real kFunctionalPathTol = 1e-6;
constexpr Real kFunctionalVariationTol = 1e-5;
constexpr Real kFunctionalSeconds = 60.0;
constexpr Real kDetTol = 1e-9;
constexpr Real kPhiIncreaseTol = 1e-6;
constexpr Real kDmdtTol = 1e-2;
constexpr Real kConvergedPhi = 1e-8;
constexpr Real kOracleTol = 1e-6;
constexpr Real kOracleSeconds = 60.0;
constexpr Real kUniquenessTol = 1e-5;
constexpr Real kConvergenceSeconds = 300.0;
constexpr Real kBlowupThreshold = 20.0;
constexpr Real kEigenStdTol = 1e-2;
constexpr Real kProjectorAlgebraTol = 1e-10;
constexpr Real kInvarianceTol = 1e-2;
constexpr Real kAlignmentTol = 1e-2;
constexpr Real kBlowupSeconds = 300.0;
constexpr Real kBetaTol = 1e-6;
constexpr Real kBetaHandTol = 1e-8;
constexpr Real kContractionSlack = 1e-6;
constexpr Real kBochnerRatio = 2.0;

struct Line {
  bool pass = true;
  std::ostringstream text;

  void require(bool ok) { pass = pass && ok; }
  template <typename T>
  Line& operator<<(const T& v) {
    text << v;
    return *this;
  }
};

std::string sci(Real v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Real seconds_since(Clock::time_point t0) {
  return std::chrono::duration<Real>(Clock::now() - t0).count();
}

MetricField random_start(const Geometry& g, int rank, Real amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_metric(g, rank, amplitude, rng);
}

Real min_eigenvalue(const MetricField& h) {
  Real m = std::numeric_limits<Real>::infinity();
  for (Eigen::Index i = 0; i < h.field().nodes(); ++i) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h.node(i), Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

// ---------------------------------------------------------------------------

void criterion1(Line& out) {
  const CheckResult c1 = calibration_check(1, 32);
  const CheckResult c2 = calibration_check(2, 32);
  out.require(c1.value < kCalibrationTol && c2.value < kCalibrationTol);
  out.require(c1.seconds < kCalibrationSeconds && c2.seconds < kCalibrationSeconds);
  out << "residual n=1 " << sci(c1.value) << " (" << sci(c1.seconds) << " s), n=2 " << sci(c2.value)
      << " (" << sci(c2.seconds) << " s)";
}

void criterion2(Line& out) {
  const auto t0 = Clock::now();
  const int metrics = 10;
  const CheckResult a = identity_check("nilpotent", 1, 32, metrics, 101);
  const CheckResult b = identity_check("nonnormal_simple", 1, 32, metrics, 202);
  const CheckResult c = identity_check("nonflat_n2", 2, 16, metrics, 303, 0.25);
  const Real secs = seconds_since(t0);
  out.require(a.value < kIdentityTol && b.value < kIdentityTol && c.value < kIdentityTol);
  out.require(secs < kIdentitySeconds);
  out << "sup residual nilpotent " << sci(a.value) << ", nonnormal_simple " << sci(b.value)
      << ", nonflat_n2(N=16) " << sci(c.value) << " over " << metrics << " metrics each, " << sci(secs)
      << " s";
}

void criterion3(Line& out) {
  const auto t0 = Clock::now();
  const std::vector<CheckResult> r = functional_checks(404, 5);
  const Real secs = seconds_since(t0);
  out.require(r.at(0).value < kFunctionalPathTol);
  out.require(r.at(1).value < kFunctionalPathTol);
  out.require(r.at(2).value < kFunctionalVariationTol);
  out.require(secs < kFunctionalSeconds);
  out << "closed vs path " << sci(r[0].value) << ", cocycle " << sci(r[1].value) << ", first variation "
      << sci(r[2].value) << ", " << sci(secs) << " s";
}

// Invariant bookkeeping over every recorded row of one flow.
struct InvariantScan {
  Real min_eig = std::numeric_limits<Real>::infinity();
  Real det = 0.0;
  Real phi_increase = 0.0;  ///< largest relative per-step increase of sup|Phi|
  Real dm_increase = 0.0;   ///< largest positive dM/dt
  Real dmdt_mismatch = 0.0;
  int dmdt_rows = 0;
  Real sigma_slack = std::numeric_limits<Real>::infinity();
};

InvariantScan scan_flow(const Connection& conn, const MetricField& h0, FlowParams p) {
  InvariantScan s;
  Real phi0 = -1.0;
  MonitorTolerances tol;
  tol.check_det = p.normalize;
  const FlowReport rep = run(conn, h0, p, [&](const FlowState& prev, const FlowState& cur, const FlowRow&) {
    if (phi0 < 0.0) phi0 = cur.sup_phi;
    s.min_eig = std::min(s.min_eig, min_eigenvalue(cur.h));
    if (prev.t == cur.t) return;
    const MonitorRecord m = monitor(conn, prev, cur, phi0, tol);
    s.det = std::max(s.det, m.det_res);
    s.phi_increase = std::max(s.phi_increase, m.sup_phi_delta / (1.0 + prev.sup_phi));
    s.sigma_slack = std::min(s.sigma_slack, m.sigma_slack);
    if (m.dmdt_resolved) {
      ++s.dmdt_rows;
      s.dm_increase = std::max(s.dm_increase, m.dmdt_fd);
      s.dmdt_mismatch = std::max(s.dmdt_mismatch, m.dmdt_mismatch);
    }
  });
  s.phi_increase = std::max(s.phi_increase, rep.summary.max_phi_increase);
  return s;
}

void criterion4(Line& out) {
  const auto t0 = Clock::now();
  struct Case {
    const char* preset;
    int rank;
    Real amplitude;
    std::uint64_t seed;
  };
  const Geometry g = make_square_torus(1, 16);
  for (const Case c : {Case{"nonnormal_simple", 2, 0.5, 7}, Case{"nilpotent", 2, 0.3, 3}, Case{"block_sum", 3, 0.4, 5}}) {
    const Connection conn = preset(c.preset, nullptr, g);
    FlowParams p;
    p.t_max = 1.0;
    p.record_stride = 100;
    const InvariantScan s = scan_flow(conn, random_start(g, c.rank, c.amplitude, c.seed), p);
    out.require(s.min_eig > 0.0 && s.det < kDetTol && s.phi_increase <= kPhiIncreaseTol);
    out.require(s.dm_increase <= 0.0 && s.dmdt_mismatch < kDmdtTol && s.sigma_slack >= 0.0);
    out << c.preset << ": min eig " << sci(s.min_eig) << ", det " << sci(s.det) << ", dPhi+ "
        << sci(s.phi_increase) << ", dM/dt max " << sci(s.dm_increase) << ", dM/dt mismatch "
        << sci(s.dmdt_mismatch) << " (" << s.dmdt_rows << " rows), sigma slack " << sci(s.sigma_slack) << "; ";
  }
  out << sci(seconds_since(t0)) << " s";
}

void criterion5(Line& out) {
  const auto t0 = Clock::now();
  const Geometry g = make_square_torus(1, 64);
  const Connection conn = preset("scalar_exact", nullptr, g);
  const MetricField exact = exact_harmonic_metric("scalar_exact", nullptr, g);
  FlowParams p;
  p.tolerance = kConvergedPhi;
  p.t_max = 5.0;
  p.normalize = false;
  p.functionals = false;
  p.record_stride = 1000;
  const FlowReport rep = run(conn, MetricField::identity(g, 1), p);
  Real err = 0.0;
  for (Eigen::Index i = 0; i < g->node_count(); ++i)
    err = std::max(err, std::abs(rep.final_state.h.node(i)(0, 0) / exact.node(i)(0, 0) - 1.0));
  const Real secs = seconds_since(t0);
  out.require(rep.status == FlowStatus::Converged && rep.final_state.sup_phi < kConvergedPhi);
  out.require(err < kOracleTol && secs < kOracleSeconds);
  out << "status " << to_string(rep.status) << " at t=" << sci(rep.final_state.t) << ", sup|Phi| "
      << sci(rep.final_state.sup_phi) << ", relative error vs closed form " << sci(err) << ", " << sci(secs)
      << " s";
}

// sup over nodes of |H1 H2^{-1} - e^c Id| / e^c with c the mean of log(tr(H1 H2^{-1}) / r).
Real scalar_ratio_residual(const MetricField& h1, const MetricField& h2) {
  const int r = h1.rank();
  const Eigen::Index n = h1.field().nodes();
  std::vector<Mat> ratio(n);
  Real c = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    ratio[i] = h1.node(i) * h2.node(i).inverse();
    c += std::log(ratio[i].trace().real() / r);
  }
  c /= static_cast<Real>(n);
  const Real ec = std::exp(c);
  Real res = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    res = std::max(res, (ratio[i] - ec * Mat::Identity(r, r)).norm() / ec);
  return res;
}

void criterion6(Line& out) {
  struct Case {
    const char* preset;
    int n;
    int size;
    Real amplitude;
    bool normalize;
  };
  for (const Case c : {Case{"nonnormal_simple", 1, 16, 0.5, true}, Case{"nonflat_n2", 2, 8, 0.3, false}}) {
    const auto t0 = Clock::now();
    const Geometry g = make_square_torus(c.n, c.size);
    const Connection conn = preset(c.preset, nullptr, g);
    FlowParams p;
    p.t_max = 200.0;
    p.tolerance = kConvergedPhi;
    p.normalize = c.normalize;
    p.functionals = false;
    p.record_stride = 1000;
    const FlowReport r1 = run(conn, random_start(g, 2, c.amplitude, 7), p);
    const FlowReport r2 = run(conn, random_start(g, 2, c.amplitude, 8), p);
    const Real uniq = scalar_ratio_residual(r1.final_state.h, r2.final_state.h);
    const Real secs = seconds_since(t0);
    const bool conv = r1.status == FlowStatus::Converged && r2.status == FlowStatus::Converged;
    out.require(conv && uniq < kUniquenessTol && secs < kConvergenceSeconds);
    out << c.preset << " N=" << c.size << ": " << to_string(r1.status) << " t=" << sci(r1.final_state.t) << " / "
        << to_string(r2.status) << " t=" << sci(r2.final_state.t) << ", sup|Phi| " << sci(r1.final_state.sup_phi)
        << " / " << sci(r2.final_state.sup_phi) << ", |H1 H2^-1 - e^c Id| " << sci(uniq) << ", " << sci(secs)
        << " s; ";
  }
}

void criterion7(Line& out) {
  const auto t0 = Clock::now();
  const Geometry g = make_square_torus(1, 16);
  const Connection conn = preset("nilpotent", nullptr, g);
  const MetricField h0 = random_start(g, 2, 0.3, 3);
  FlowParams p;
  p.t_max = 40.0;
  p.blowup_threshold = kBlowupThreshold;
  p.functionals = false;
  p.record_stride = 2000;
  std::vector<Real> marks{10.0, 20.0};
  std::vector<FlowState> states;
  const FlowReport rep = run(conn, h0, p, [&](const FlowState&, const FlowState& cur, const FlowRow&) {
    if (states.size() < marks.size() && cur.t >= marks[states.size()]) states.push_back(cur);
  });
  states.push_back(rep.final_state);

  Mat e1 = Mat::Zero(2, 1);
  e1(0, 0) = 1.0;
  out.require(rep.status == FlowStatus::Blowup);
  out << "status " << to_string(rep.status) << " at t=" << sci(rep.final_state.t) << " with sup|s| "
      << sci(rep.rows.back().s_sup) << " (threshold " << kBlowupThreshold << ")";
  Real prev_invariance = std::numeric_limits<Real>::infinity();
  for (const FlowState& s : states) {
    const BlowupReport b = blowup_analysis(conn, s.k, s.h);
    Real std_max = 0.0;
    for (Real v : b.eigen_std) std_max = std::max(std_max, v);
    out << "; t=" << sci(s.t) << ": eig std " << sci(std_max);
    out.require(std_max < kEigenStdTol);
    const ProjectorReport* pr = nullptr;
    for (const auto& q : b.projectors)
      if (q.rank == 1) pr = &q;
    if (!pr) {
      out.require(false);
      out << ", no rank-1 projector";
      continue;
    }
    const Real align = subspace_alignment(s.k, pr->pi, e1);
    out.require(pr->idempotency < kProjectorAlgebraTol && pr->self_adjointness < kProjectorAlgebraTol);
    out.require(pr->invariance < kInvarianceTol && pr->invariance < prev_invariance);
    out.require(align < kAlignmentTol);
    out << ", projector " << sci(std::max(pr->idempotency, pr->self_adjointness)) << ", invariance "
        << sci(pr->invariance) << ", |pi - P_e1| " << sci(align);
    prev_invariance = pr->invariance;
  }
  const Real secs = seconds_since(t0);
  out.require(secs < kBlowupSeconds);
  out << "; " << sci(secs) << " s";
}

void criterion8(Line& out) {
  const auto t0 = Clock::now();
  const Geometry g = make_square_torus(1, 16);
  const Connection sum = preset("block_sum", nullptr, g);
  FlowParams p;
  p.t_max = 200.0;
  p.tolerance = kConvergedPhi;
  p.functionals = false;
  p.record_stride = 1000;
  const FlowReport rep = run(sum, random_start(g, 3, 0.4, 5), p);
  Mat e1 = Mat::Zero(3, 1);
  e1(0, 0) = 1.0;
  const MetricField& h = rep.final_state.h;
  const SplittingReport s = splitting_check(sum, h, orthogonal_projector(h, e1));

  const Connection nil = preset("nilpotent", nullptr, g);
  const MetricField id = MetricField::identity(g, 2);
  Mat f1 = Mat::Zero(2, 1);
  f1(0, 0) = 1.0;
  const SplittingReport sn = splitting_check(nil, id, orthogonal_projector(id, f1));
  const Real hand = 1.0 / std::sqrt(2.0);

  out.require(rep.status == FlowStatus::Converged && s.beta_l2 < kBetaTol);
  out.require(std::abs(sn.beta_l2 - hand) < kBetaHandTol);
  out << "block_sum " << to_string(rep.status) << " t=" << sci(rep.final_state.t) << ": |beta|_L2 "
      << sci(s.beta_l2) << "; nilpotent at Id: |beta|_L2 " << sn.beta_l2 << " vs 1/sqrt(2), diff "
      << sci(std::abs(sn.beta_l2 - hand)) << "; " << sci(seconds_since(t0)) << " s";
}

void criterion9(Line& out) {
  struct Case {
    const char* preset;
    int n;
    int size;
    Real t_max;
    bool normalize;
  };
  for (const Case c : {Case{"nonnormal_simple", 1, 16, 2.0, true}, Case{"nonflat_n2", 2, 8, 0.5, false}}) {
    const auto t0 = Clock::now();
    const Geometry g = make_square_torus(c.n, c.size);
    const Connection conn = preset(c.preset, nullptr, g);
    MetricField a0 = random_start(g, 2, 0.4, 11);
    MetricField b0 = random_start(g, 2, 0.4, 12);
    if (c.normalize) {
      a0 = normalize_initial(conn, a0);
      b0 = normalize_initial(conn, b0);
    }
    FlowState a = make_state(conn, a0, a0);
    FlowState b = make_state(conn, b0, b0);
    const Real dt = default_timestep(*g, 0.2);
    const int stride = 50;
    Real prev = sup_sigma(a.h, b.h);
    const Real first = prev;
    Real worst = -std::numeric_limits<Real>::infinity();
    int strides = 0;
    while (a.t < c.t_max - 0.5 * dt) {
      for (int k = 0; k < stride; ++k) {
        a = step(conn, a, dt);
        b = step(conn, b, dt);
      }
      const Real cur = sup_sigma(a.h, b.h);
      worst = std::max(worst, cur - prev);
      prev = cur;
      ++strides;
    }
    out.require(worst <= kContractionSlack);
    out << c.preset << ": sup sigma " << sci(first) << " -> " << sci(prev) << " over " << strides
        << " strides, max increase " << sci(worst) << ", " << sci(seconds_since(t0)) << " s; ";
  }
}

void criterion10(Line& out) {
  const auto t0 = Clock::now();
  const Real horizon = 0.01;
  const Real dt0 = 4.0 * default_timestep(*make_square_torus(1, 64), 0.2);
  const int sizes[3] = {16, 32, 64};
  Real res[3];
  for (int l = 0; l < 3; ++l) {
    const Geometry g = make_square_torus(1, sizes[l]);
    const Connection conn = preset("nonnormal_simple", nullptr, g);
    const MetricField h0 = normalize_initial(conn, random_start(g, 2, 0.5, 7));
    FlowState a = make_state(conn, h0, h0);
    const Real dt = dt0 / static_cast<Real>(1 << l);
    const long n = std::lround(horizon / dt);
    for (long k = 0; k < n; ++k) a = step(conn, a, dt);
    const FlowState b = step(conn, a, dt);
    const FlowState c = step(conn, b, dt);
    res[l] = bochner_residual(conn, a, b, c);
  }
  const Real r1 = res[0] / res[1];
  const Real r2 = res[1] / res[2];
  out.require(r1 >= kBochnerRatio && r2 >= kBochnerRatio);
  out << "residual at t=" << horizon << ": N=16 " << sci(res[0]) << ", N=32 " << sci(res[1]) << ", N=64 "
      << sci(res[2]) << "; ratios " << r1 << ", " << r2 << " (need >= " << kBochnerRatio << "); "
      << sci(seconds_since(t0)) << " s";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the harmonic-metric heat flow"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "criterion numbers to run (default: all)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty())
    for (int k = 1; k <= 10; ++k) selected.push_back(k);

  const std::vector<std::function<void(Line&)>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                             criterion5, criterion6, criterion7, criterion8,
                                                             criterion9, criterion10};
  bool all = true;
  for (int k : selected) {
    Line line;
    const auto t0 = Clock::now();
    try {
      criteria[k - 1](line);
    } catch (const std::exception& e) {
      line.require(false);
      line << "exception: " << e.what();
    }
    std::string details = line.text.str();
    while (!details.empty() && (details.back() == ' ' || details.back() == ';')) details.pop_back();
    std::cout << "criterion " << k << (line.pass ? " PASS  " : " FAIL  ") << details << "  ("
              << sci(seconds_since(t0)) << " s)" << std::endl;
    all = all && line.pass;
  }
  return all ? 0 : 1;
}
