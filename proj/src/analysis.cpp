#include "nhym/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pointwise.hpp"

namespace nhym {
namespace {

ScalarField square(const ScalarField& f) {
  ScalarField out(f.geometry());
  for (Eigen::Index i = 0; i < f.size(); ++i) out[i] = f[i] * f[i];
  return out;
}

Real max_real(const ScalarField& f) { return f.data().real().maxCoeff(); }
Real min_real(const ScalarField& f) { return f.data().real().minCoeff(); }

ScalarField log_det_ratio(const EndField& h, const EndField& k) {
  return detail::reduce_nodes(
      [](const auto& hm, const auto& km) -> Complex {
        return std::log(hm.determinant().real()) - std::log(km.determinant().real());
      },
      h, k);
}

// Re <a, b>_H summed into a scalar field.
ScalarField pair_field(const EndField& h, const EndField& h_inv, const EndField& a,
                       const EndField& b) {
  return detail::reduce_nodes(
      [](const auto& hm, const auto& hi, const auto& am, const auto& bm) -> Complex {
        return detail::inner(hm, hi, am, bm).real();
      },
      h, h_inv, a, b);
}

Real l2_norm(const EndField& h, const EndField& h_inv, const OneForm& x) {
  return std::sqrt(std::max<Real>(0.0, integrate(h_norm_squared(h, h_inv, x)).real()));
}

// sqrt(-1) Lambda tr(X ^ Y) = 2 sum_j tr(X_j Y_jbar - X_jbar Y_j).
ScalarField lambda_trace_wedge(const OneForm& x, const OneForm& y) {
  ScalarField out(x.geometry());
  for (int j = 0; j < x.complex_dim(); ++j) {
    out += (x.dz(j) * y.dzbar(j)).trace();
    out -= (x.dzbar(j) * y.dz(j)).trace();
  }
  return Complex(2.0) * out;
}

EndField projector_onto(const MetricField& k, const Mat& v) {
  EndField out(k.geometry(), k.rank());
  for_each_node(out.nodes(), [&](Eigen::Index i) {
    const Mat km = k.node(i);
    const Mat gram = v.adjoint() * km * v;
    out.set_node(i, v * gram.inverse() * v.adjoint() * km);
  });
  return out;
}

}  // namespace

MonitorRecord monitor(const Connection& conn, const FlowState& prev, const FlowState& cur,
                      Real phi0_sup, const MonitorTolerances& tol) {
  MonitorRecord m;
  m.t = cur.t;
  m.dt = cur.t - prev.t;
  if (!(m.dt > 0.0)) throw ValidationError("monitor requires prev.t < cur.t");
  const Real inv_dt = 1.0 / m.dt;

  const ScalarField tr_prev = prev.phi.trace();
  const ScalarField tr_cur = cur.phi.trace();
  const ScalarField lap_tr = laplacian(tr_prev);
  m.tr_phi_heat = (Complex(inv_dt) * (tr_cur - tr_prev) - lap_tr).sup_norm();
  m.tr_phi_scale = 1.0 + lap_tr.sup_norm();

  const ScalarField p2_prev = square(phi_norm(prev));
  const ScalarField p2_cur = square(phi_norm(cur));
  const OneForm dphi = apply_D(conn, prev.phi);
  const OneForm dcphi = apply_Dc(prev.dec, prev.phi);
  const ScalarField pairing = lambda_trace_wedge(dphi, dcphi) - lambda_trace_wedge(dcphi, dphi);
  const ScalarField lhs = Complex(inv_dt) * (p2_cur - p2_prev) - laplacian(p2_prev);
  m.phi2_heat = (lhs + pairing).sup_norm();
  m.phi2_ineq =
      max_real(lhs + Complex(2.0) * h_norm_squared(prev.dec.h, prev.dec.h_inv, dphi));
  m.phi2_scale = 1.0 + p2_prev.sup_norm();

  m.sup_phi_delta = cur.sup_phi - prev.sup_phi;
  m.det_res = log_det_ratio(cur.h.field(), cur.k.field()).sup_norm();

  const int r = conn.rank();
  const Real bound = 2.0 * r * std::expm1(phi0_sup * cur.t) * (1.0 + 1e-3);
  m.sigma_slack = bound - sigma_field(cur.k, cur.h).sup_norm();

  const Real m_prev = donaldson_closed(conn, prev.k, prev.h);
  const Real m_cur = donaldson_closed(conn, cur.k, cur.h);
  m.dmdt_fd = (m_cur - m_prev) * inv_dt;
  m.dmdt_predicted = -0.5 * (integrate(p2_prev).real() + integrate(p2_cur).real());
  m.dmdt_resolved = std::abs(m_cur - m_prev) > 1e-9 * (1.0 + std::abs(m_cur));
  m.dmdt_mismatch = std::abs(m.dmdt_fd - m.dmdt_predicted) /
                    std::max(std::abs(m.dmdt_predicted), std::numeric_limits<Real>::min());

  if (m.tr_phi_heat > tol.tr_phi_heat * m.tr_phi_scale) m.flags.push_back("tr_phi_heat");
  if (m.phi2_heat > tol.phi2_heat * m.phi2_scale) m.flags.push_back("phi2_heat");
  if (m.phi2_ineq > tol.phi2_heat * m.phi2_scale) m.flags.push_back("phi2_inequality");
  if (tol.check_det && m.det_res > tol.det) m.flags.push_back("det");
  if (m.sup_phi_delta > tol.phi_increase * (1.0 + prev.sup_phi)) m.flags.push_back("phi_increase");
  if (m.sigma_slack < 0.0) m.flags.push_back("sigma_bound");
  if (m.dmdt_fd > 0.0 && m.dmdt_resolved) m.flags.push_back("donaldson_increase");
  if (m.dmdt_resolved && m.dmdt_mismatch > tol.dmdt) m.flags.push_back("dmdt");
  return m;
}

BochnerTerms bochner_terms(const Decomposition& d) {
  const std::vector<EndField> psi = d.psi.real_components();
  const std::vector<EndField> ah = d.a_h.real_components();
  const int dim = static_cast<int>(psi.size());
  const Geometry& geom = d.h.geometry();
  BochnerTerms t{ScalarField(geom), ScalarField(geom), ScalarField(geom), ScalarField(geom)};
  for (int nu = 0; nu < dim; ++nu) {
    t.psi2 += pair_field(d.h, d.h_inv, psi[nu], psi[nu]);
    for (int mu = 0; mu < dim; ++mu) {
      const EndField grad = axis_derivative(psi[nu], mu) + commutator(ah[mu], psi[nu]);
      t.grad2 += pair_field(d.h, d.h_inv, grad, grad);
    }
  }
  for (int mu = 0; mu < dim; ++mu)
    for (int nu = mu + 1; nu < dim; ++nu) {
      const EndField w = commutator(psi[mu], psi[nu]);
      const EndField f = axis_derivative(ah[nu], mu) - axis_derivative(ah[mu], nu) +
                         commutator(ah[mu], ah[nu]) + w;
      t.wedge2 += Complex(2.0) * pair_field(d.h, d.h_inv, w, w);
      t.coupling += Complex(2.0) * pair_field(d.h, d.h_inv, f, w);
    }
  return t;
}

Real bochner_residual(const Connection& conn, const FlowState& a, const FlowState& b,
                      const FlowState& c) {
  (void)conn;
  const Real dt1 = b.t - a.t;
  const Real dt2 = c.t - b.t;
  if (!(dt1 > 0.0) || std::abs(dt1 - dt2) > 1e-9 * dt1)
    throw ValidationError("bochner_residual needs three equally spaced states");
  const ScalarField pa = bochner_terms(a.dec).psi2;
  const ScalarField pc = bochner_terms(c.dec).psi2;
  const BochnerTerms mid = bochner_terms(b.dec);
  const ScalarField lhs = Complex(0.5 / dt1) * (pc - pa) - laplacian(mid.psi2);
  const ScalarField rhs = Complex(-2.0) * mid.grad2 - Complex(2.0) * mid.wedge2 +
                          Complex(2.0) * mid.coupling;
  return (lhs - rhs).sup_norm();
}

Real subspace_alignment(const MetricField& k, const EndField& pi, const Mat& vectors) {
  return (pi - projector_onto(k, vectors)).sup_norm();
}

EndField orthogonal_projector(const MetricField& h, const Mat& vectors) {
  return projector_onto(h, vectors);
}

BlowupReport blowup_analysis(const Connection& conn, const MetricField& k, const MetricField& h,
                             Real min_gap) {
  BlowupReport rep;
  const EndField s = metric_log(k, h);
  rep.l1_norm = integrate(k_norm(k, s)).real();
  if (!(rep.l1_norm > 0.0)) throw ValidationError("blowup_analysis needs a nonzero log-metric");
  rep.u = Complex(1.0 / rep.l1_norm) * s;
  rep.u_l1 = integrate(k_norm(k, rep.u)).real();
  rep.tr_u_integral = integrate(rep.u.trace()).real();
  rep.eigenvalues = pointwise_eigenvalues(k, rep.u);

  const int r = conn.rank();
  const Eigen::Index nodes = rep.eigenvalues.cols();
  for (int a = 0; a < r; ++a) {
    const Eigen::ArrayXd row = rep.eigenvalues.row(a).transpose().array();
    const Real mean = row.mean();
    rep.eigen_mean.push_back(mean);
    rep.eigen_std.push_back(std::sqrt((row - mean).square().sum() / static_cast<Real>(nodes)));
  }
  const Real spread = r > 1 ? (rep.eigen_mean.back() - rep.eigen_mean.front()) / (r - 1) : 0.0;
  for (int a = 0; a < r; ++a)
    rep.eigen_std_relative.push_back(spread > 0.0 ? rep.eigen_std[a] / spread
                                                  : std::numeric_limits<Real>::infinity());

  const EndField k_inv = k.inverse();
  const EndField id = EndField::identity(k.geometry(), r);
  std::ostringstream note;
  for (int a = 0; a + 1 < r; ++a) {
    const Real gap = (rep.eigenvalues.row(a + 1) - rep.eigenvalues.row(a)).minCoeff();
    rep.gap_min.push_back(gap);
    if (gap <= min_gap) {
      note << "gap " << a + 1 << " below minimum (" << gap << "); ";
      continue;
    }
    ProjectorReport p;
    p.rank = a + 1;
    p.pi = spectral_projector(k, rep.u, p.rank, min_gap);
    p.idempotency = (p.pi * p.pi - p.pi).sup_norm();
    p.self_adjointness = (k.field() * p.pi - adjoint(p.pi) * k.field()).sup_norm();
    p.invariance = l2_norm(k.field(), k_inv, left_multiply(id - p.pi, apply_D(conn, p.pi)));
    rep.candidate_ranks.push_back(p.rank);
    rep.projectors.push_back(std::move(p));
  }
  if (rep.projectors.empty()) note << "no usable spectral gap";
  rep.note = note.str();
  return rep;
}

SplittingReport splitting_check(const Connection& conn, const MetricField& h, const EndField& pi,
                                Real tol) {
  const EndField& hf = h.field();
  if ((pi * pi - pi).sup_norm() > tol * (1.0 + pi.sup_norm()))
    throw ValidationError("splitting_check: pi is not idempotent");
  if ((hf * pi - adjoint(pi) * hf).sup_norm() > tol * (1.0 + hf.sup_norm() * pi.sup_norm()))
    throw ValidationError("splitting_check: pi is not H-self-adjoint");
  const Decomposition d = decompose(conn, h);
  const EndField complement = EndField::identity(h.geometry(), h.rank()) - pi;
  const OneForm dpi = apply_D(conn, pi);
  SplittingReport rep;
  rep.beta = Complex(-0.5) * left_multiply(pi, right_multiply(dpi, complement));
  rep.beta_l2 = l2_norm(d.h, d.h_inv, rep.beta);
  rep.invariance = l2_norm(d.h, d.h_inv, left_multiply(complement, dpi));
  rep.trace_term = 0.25 * integrate((pi * phi(d)).trace()).real();
  rep.block_residual = rep.trace_term + rep.beta_l2 * rep.beta_l2;
  return rep;
}

TwoMetricReport two_metric_check(const Connection& conn, const MetricField& h,
                                 const MetricField& k) {
  const Decomposition dh = decompose(conn, h);
  const Decomposition dk = decompose(conn, k);
  const EndField rel = dk.h_inv * dh.h;      // h = K^{-1} H
  const EndField rel_inv = dh.h_inv * dk.h;  // h^{-1} = H^{-1} K
  const ScalarField term1 =
      lambda_trace_wedge(apply_D(conn, rel), left_multiply(rel_inv, apply_Dc(dk, rel)));
  const ScalarField term2 =
      lambda_trace_wedge(apply_D(conn, rel_inv), left_multiply(rel, apply_Dc(dh, rel_inv)));
  const ScalarField tr_sum = rel.trace() + rel_inv.trace();
  const ScalarField sigma =
      tr_sum - ScalarField::constant(h.geometry(), Complex(2.0 * conn.rank()));
  const ScalarField lap = laplacian(sigma);

  const EndField phi_h = phi(dh);
  const EndField phi_k = phi(dk);
  const ScalarField source = (rel * (phi_h - phi_k)).trace() + (rel_inv * (phi_k - phi_h)).trace();

  TwoMetricReport rep;
  rep.harmonic_residual = (lap - term1 - term2).sup_norm();
  rep.general_residual = (lap - term1 - term2 - source).sup_norm();
  rep.min_norm_terms = std::min(min_real(term1), min_real(term2));

  ScalarField log_sum(h.geometry());
  for (Eigen::Index i = 0; i < log_sum.size(); ++i) log_sum[i] = std::log(tr_sum[i].real());
  const ScalarField norm_h =
      detail::reduce_nodes([](const auto& p, const auto& m, const auto& mi) -> Complex {
        return std::sqrt(std::max<Real>(0.0, detail::inner(m, mi, p, p).real()));
      }, phi_h, dh.h, dh.h_inv);
  const ScalarField norm_k =
      detail::reduce_nodes([](const auto& p, const auto& m, const auto& mi) -> Complex {
        return std::sqrt(std::max<Real>(0.0, detail::inner(m, mi, p, p).real()));
      }, phi_k, dk.h, dk.h_inv);
  rep.log_inequality_slack = min_real(laplacian(log_sum) + norm_h + norm_k);
  return rep;
}

Real sup_sigma(const MetricField& h, const MetricField& k) { return sigma_field(h, k).sup_norm(); }

}  // namespace nhym
