#include "nhym/experiment.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>

#include "nhym/presets.hpp"
#include "nhym/random_fields.hpp"
#include "nhym/snapshot.hpp"

namespace nhym {
namespace {

using nlohmann::json;

std::string format_real(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Non-finite values are not representable in JSON; they are written as null.
json num(Real v) { return std::isfinite(v) ? json(v) : json(); }

json vec_json(const std::vector<Real>& v) {
  json out = json::array();
  for (Real x : v) out.push_back(num(x));
  return out;
}

// Column basis of the span where the mean of pi has eigenvalue above 1/2.
Mat mean_image(const EndField& pi) {
  const Mat avg = integrate(pi) / pi.grid().volume();
  const Mat herm = 0.5 * (avg + avg.adjoint());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > 0.5) keep.push_back(i);
  Mat basis(pi.rank(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    Eigen::VectorXcd v = es.eigenvectors().col(keep[c]);
    // Fix the phase so the largest entry is real and positive.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    v *= std::abs(v[arg]) / v[arg];
    basis.col(static_cast<Eigen::Index>(c)) = v;
  }
  return basis;
}

void write_snapshot_set(const std::filesystem::path& path, const FlowState& s) {
  write_snapshot(path.string(), {{"H", s.h.field()},
                                 {"K", s.k.field()},
                                 {"Phi", s.phi},
                                 {"s", metric_log(s.k, s.h)}});
}

struct InvariantTracker {
  Real max_det = 0.0;
  Real max_tr_phi_heat = 0.0;
  Real max_phi2_heat = 0.0;
  Real max_phi2_ineq = -std::numeric_limits<Real>::infinity();
  Real min_sigma_slack = std::numeric_limits<Real>::infinity();
  Real max_dmdt_mismatch = 0.0;
  Real max_dmdt = -std::numeric_limits<Real>::infinity();
  int monitored = 0;
  int dmdt_resolved = 0;
  std::map<std::string, int> flags;

  void add(const MonitorRecord& m) {
    ++monitored;
    max_det = std::max(max_det, m.det_res);
    max_tr_phi_heat = std::max(max_tr_phi_heat, m.tr_phi_heat / m.tr_phi_scale);
    max_phi2_heat = std::max(max_phi2_heat, m.phi2_heat / m.phi2_scale);
    max_phi2_ineq = std::max(max_phi2_ineq, m.phi2_ineq / m.phi2_scale);
    min_sigma_slack = std::min(min_sigma_slack, m.sigma_slack);
    max_dmdt = std::max(max_dmdt, m.dmdt_fd);
    if (m.dmdt_resolved) {
      ++dmdt_resolved;
      max_dmdt_mismatch = std::max(max_dmdt_mismatch, m.dmdt_mismatch);
    }
    for (const auto& f : m.flags) ++flags[f];
  }

  json to_json() const {
    json j = {{"monitored_rows", monitored},
              {"max_det_residual", num(max_det)},
              {"max_tr_phi_heat_residual_relative", num(max_tr_phi_heat)},
              {"max_phi2_heat_residual_relative", num(max_phi2_heat)},
              {"max_phi2_norm_bound_relative", monitored ? num(max_phi2_ineq) : json()},
              {"min_sigma_bound_slack", monitored ? num(min_sigma_slack) : json()},
              {"max_dmdt", monitored ? num(max_dmdt) : json()},
              {"dmdt_resolved_rows", dmdt_resolved},
              {"max_dmdt_relative_mismatch", num(max_dmdt_mismatch)}};
    j["flags"] = flags;
    return j;
  }
};

}  // namespace

int exit_code(FlowStatus s) {
  switch (s) {
    case FlowStatus::Converged: return kExitConverged;
    case FlowStatus::Blowup: return kExitBlowup;
    case FlowStatus::MaxTime: return kExitMaxTime;
  }
  return kExitMaxTime;
}

const std::string& convention_ledger() {
  static const std::string text =
      "axes=(x1,y1,...,xn,yn), axis 0 fastest\n"
      "omega=(i/2) sum_j dz_j ^ dzbar_j, unit-period square torus by default\n"
      "d_z=(d_x - i d_y)/2, d_zbar=(d_x + i d_y)/2\n"
      "d^c=dbar - d on functions\n"
      "sqrt(-1) Lambda: alpha -> 2 sum_j alpha_{j jbar}\n"
      "Laplacian=sqrt(-1) Lambda d d^c=Euclidean\n"
      "|dz_j|^2=2, one-form norm 2 sum_c |phi_c|_H^2\n"
      "<s,t>_H=t^dagger H s, |M|_H^2=tr(M H^-1 M^dagger H)\n"
      "psi_H=(A + H^-1 A^dagger H - H^-1 dH)/2\n"
      "Phi(H)=4 sqrt(-1) Lambda G_H, flow H^-1 dH/dt=Phi\n"
      "|s|_K=tr(s K^-1 s^dagger K)^(1/2)\n"
      "Donaldson kernel Psi(x,y)=(e^(y-x)-(y-x)-1)/(y-x)^2\n";
  return text;
}

std::string convention_ledger_checksum() {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : convention_ledger()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016" PRIx64, h);
  return buf;
}

void require_same_ledger(const json& summary) {
  const std::string theirs = summary.value("convention_ledger_checksum", std::string());
  if (theirs != convention_ledger_checksum())
    throw ValidationError("artifact convention ledger '" + theirs + "' differs from '" +
                          convention_ledger_checksum() + "'; refusing to compare");
}

Connection build_connection(const ConnectionConfig& c, const Geometry& geom) {
  if (!c.preset.empty()) return preset(c.preset, c.params, geom);
  const auto comps = read_snapshot(c.file, geom);
  const int n = geom->complex_dim();
  const int r = comps.front().field.rank();
  OneForm a(geom, r);
  for (const auto& comp : comps) {
    bool matched = false;
    for (int j = 0; j < n; ++j) {
      if (comp.name == "dz" + std::to_string(j + 1)) {
        a.dz(j) = comp.field;
        matched = true;
      } else if (comp.name == "dzbar" + std::to_string(j + 1)) {
        a.dzbar(j) = comp.field;
        matched = true;
      }
    }
    if (!matched) throw ValidationError("connection snapshot: unexpected component '" + comp.name + "'");
  }
  Connection conn(std::move(a), std::filesystem::path(c.file).stem().string());
  validate_nhym(conn);
  return conn;
}

MetricField build_initial_metric(const InitialMetricConfig& m, const Geometry& geom, int rank) {
  if (m.kind == "identity") return MetricField::identity(geom, rank);
  if (m.kind == "inline") {
    for (const auto& comp : read_snapshot(m.file, geom))
      if (comp.name == "H") {
        if (comp.field.rank() != rank) throw ValidationError("inline metric has the wrong rank");
        return MetricField(comp.field);
      }
    throw ValidationError("inline metric snapshot has no component 'H'");
  }
  std::mt19937_64 rng(m.seed);
  if (m.kind == "conformal") {
    const ScalarField u = random_scalar_field(geom, m.amplitude, m.max_mode, rng, true);
    ScalarField w(geom);
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = std::exp(2.0 * u[i].real());
    return MetricField(EndField::scalar(w, rank));
  }
  return random_metric(geom, rank, m.amplitude, rng, m.max_mode);
}

const std::vector<std::string>& series_columns() {
  static const std::vector<std::string> cols = {"t",      "dt",    "sup_phi", "l2_phi",
                                                "donaldson", "energy", "sigma0", "s_sup",
                                                "s_l1",   "det_res", "phi_monotone_flag"};
  return cols;
}

void write_series_csv(const std::filesystem::path& path, const std::vector<FlowRow>& rows) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  const auto& cols = series_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << "\n";
  for (const FlowRow& r : rows) {
    for (Real v : {r.t, r.dt, r.sup_phi, r.l2_phi, r.donaldson, r.energy, r.sigma0, r.s_sup, r.s_l1,
                   r.det_res})
      os << format_real(v) << ",";
    os << (r.phi_monotone_flag ? 1 : 0) << "\n";
  }
  if (!os) throw Error("write failed for " + path.string());
}

json to_json(const FlowRow& r) {
  return {{"t", num(r.t)},         {"dt", num(r.dt)},         {"sup_phi", num(r.sup_phi)},
          {"l2_phi", num(r.l2_phi)}, {"donaldson", num(r.donaldson)}, {"energy", num(r.energy)},
          {"sigma0", num(r.sigma0)}, {"s_sup", num(r.s_sup)},   {"s_l1", num(r.s_l1)},
          {"det_res", num(r.det_res)}, {"phi_monotone_flag", r.phi_monotone_flag}};
}

json to_json(const BlowupReport& b, const MetricField& k) {
  json projectors = json::array();
  for (const auto& p : b.projectors) {
    const Mat image = mean_image(p.pi);
    projectors.push_back({{"rank", p.rank},
                          {"idempotency", num(p.idempotency)},
                          {"self_adjointness", num(p.self_adjointness)},
                          {"invariance_l2", num(p.invariance)},
                          {"image_basis", matrix_to_json(image)},
                          {"image_alignment", num(subspace_alignment(k, p.pi, image))}});
  }
  return {{"l1_norm", num(b.l1_norm)},
          {"u_l1", num(b.u_l1)},
          {"tr_u_integral", num(b.tr_u_integral)},
          {"eigen_mean", vec_json(b.eigen_mean)},
          {"eigen_std", vec_json(b.eigen_std)},
          {"eigen_std_relative", vec_json(b.eigen_std_relative)},
          {"gap_min", vec_json(b.gap_min)},
          {"candidate_ranks", b.candidate_ranks},
          {"projectors", projectors},
          {"note", b.note}};
}

json to_json(const SplittingReport& s) {
  return {{"beta_l2", num(s.beta_l2)},
          {"invariance_l2", num(s.invariance)},
          {"trace_term", num(s.trace_term)},
          {"block_residual", num(s.block_residual)}};
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  const auto started = std::chrono::steady_clock::now();
  const Geometry geom = build_geometry(config.geometry);
  const Connection conn = build_connection(config.connection, geom);
  const MetricField h0 = build_initial_metric(config.initial_metric, geom, conn.rank());

  std::filesystem::create_directories(out_dir);
  if (config.output.snapshot_initial)
    write_snapshot((out_dir / "initial.snap").string(), {{"H", h0.field()}});

  InvariantTracker tracker;
  Real phi0_sup = 0.0;
  bool first = true;
  FlowObserver observer = [&](const FlowState& prev, const FlowState& cur, const FlowRow&) {
    if (first) {
      phi0_sup = cur.sup_phi;
      first = false;
      return;
    }
    if (config.output.monitor) {
      MonitorTolerances tol;
      tol.check_det = config.flow.normalize;
      tracker.add(monitor(conn, prev, cur, phi0_sup, tol));
    }
  };

  ExperimentResult result;
  result.report = run(conn, h0, config.flow, observer);
  const FlowReport& rep = result.report;
  result.exit_code = exit_code(rep.status);
  write_series_csv(out_dir / "series.csv", rep.rows);
  if (config.output.snapshot_final) write_snapshot_set(out_dir / "final.snap", rep.final_state);

  const FlowState& fin = rep.final_state;
  json summary;
  summary["name"] = config.name;
  summary["status"] = to_string(rep.status);
  summary["exit_code"] = result.exit_code;
  summary["convention_ledger_checksum"] = convention_ledger_checksum();
  summary["seed"] = config.seed;
  summary["geometry"] = geom->describe();
  const NhymCertificate& cert = *conn.certificate();
  summary["connection"] = {{"name", conn.name()},
                           {"rank", conn.rank()},
                           {"lambda", num(cert.lambda)},
                           {"f20", num(cert.f20)},
                           {"f02", num(cert.f02)},
                           {"lambda_deviation", num(cert.lambda_deviation)}};
  summary["initial_metric"] = config.initial_metric.kind;
  summary["t_final"] = num(fin.t);
  summary["steps"] = rep.summary.steps;
  summary["halvings"] = rep.summary.halvings;
  summary["monitor_trips"] = rep.summary.monitor_trips;
  summary["max_relative_phi_increase"] = num(rep.summary.max_phi_increase);
  summary["normalization_residual"] = num(rep.summary.normalization_residual);
  summary["terminal"] = rep.rows.empty() ? json() : to_json(rep.rows.back());
  summary["invariants"] = tracker.to_json();

  summary["blowup"] = json();
  if (rep.status != FlowStatus::Converged && config.analysis.blowup) {
    summary["blowup"] = to_json(blowup_analysis(conn, fin.k, fin.h, config.analysis.min_gap), fin.k);
    summary["blowup"]["analysed_at_t"] = rep.rows.empty() ? 0.0 : rep.rows.back().t;
  }

  summary["splitting"] = json();
  if (config.analysis.splitting_vectors) {
    const Mat& v = *config.analysis.splitting_vectors;
    if (v.rows() != conn.rank()) throw ValidationError("splitting_vectors length must equal the rank");
    summary["splitting"] = to_json(splitting_check(conn, fin.h, orthogonal_projector(fin.h, v)));
  }

  summary["oracle"] = json();
  const std::string& p = config.connection.preset;
  if (p == "scalar_exact" || p == "scalar_character") {
    const MetricField exact = exact_harmonic_metric(p, config.connection.params, geom);
    Real err = 0.0, log_mean = 0.0;
    for (Eigen::Index i = 0; i < geom->node_count(); ++i)
      log_mean += std::log(fin.h.node(i)(0, 0).real() / exact.node(i)(0, 0).real());
    log_mean /= static_cast<Real>(geom->node_count());
    Real err_scaled = 0.0;
    for (Eigen::Index i = 0; i < geom->node_count(); ++i) {
      const Real e = exact.node(i)(0, 0).real();
      const Real hv = fin.h.node(i)(0, 0).real();
      err = std::max(err, std::abs(hv - e) / e);
      err_scaled = std::max(err_scaled, std::abs(hv * std::exp(-log_mean) - e) / e);
    }
    summary["oracle"] = {{"closed_form", "exp(2(Re f - mean))"},
                         {"relative_error", num(err)},
                         {"relative_error_up_to_scale", num(err_scaled)}};
  }
  summary["runtime_seconds"] =
      std::chrono::duration<Real>(std::chrono::steady_clock::now() - started).count();
  summary["config"] = config.source;

  std::ofstream os(out_dir / "summary.json");
  if (!os) throw Error("cannot write " + (out_dir / "summary.json").string());
  os << summary.dump(2) << "\n";
  result.summary = std::move(summary);
  return result;
}

json oracle_poisson(const ExperimentConfig& config) {
  const Geometry geom = build_geometry(config.geometry);
  const Connection conn = build_connection(config.connection, geom);
  if (conn.rank() != 1) throw ValidationError("oracle poisson needs a rank-1 connection");
  // D_H^* psi_H = 0 for H = e^w reads Laplacian(w) = 4 Re sum_j dbar_j (A_j + conj A_jbar).
  ScalarField src(geom);
  for (int j = 0; j < geom->complex_dim(); ++j) {
    ScalarField b = conn.form().dz(j).entry(0, 0);
    const ScalarField abar = conn.form().dzbar(j).entry(0, 0);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] += std::conj(abar[i]);
    src += derivative(b, j, Wirtinger::Dzbar);
  }
  for (Eigen::Index i = 0; i < src.size(); ++i) src[i] = 4.0 * src[i].real();
  const ScalarField w = poisson_solve(src);
  ScalarField hv(geom);
  for (Eigen::Index i = 0; i < hv.size(); ++i) hv[i] = std::exp(w[i].real());
  const MetricField h(EndField::scalar(hv, 1));
  const Real residual = phi(conn, h).sup_norm();

  json out = {{"convention_ledger_checksum", convention_ledger_checksum()},
              {"geometry", geom->describe()},
              {"connection", conn.name()},
              {"sup_phi", num(residual)}};
  const std::string& p = config.connection.preset;
  if (p == "scalar_exact" || p == "scalar_character") {
    const MetricField exact = exact_harmonic_metric(p, config.connection.params, geom);
    Real err = 0.0;
    for (Eigen::Index i = 0; i < hv.size(); ++i) {
      const Real e = exact.node(i)(0, 0).real();
      err = std::max(err, std::abs(hv[i].real() - e) / e);
    }
    out["closed_form_relative_error"] = num(err);
  }
  return out;
}

}  // namespace nhym
