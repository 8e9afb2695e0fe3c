#include "nhym/connection.hpp"

#include <algorithm>
#include <cmath>

#include "nhym/random_fields.hpp"

namespace nhym {
namespace {

// Basis covectors of a 1-form are indexed 0..2n-1: dz_0..dz_{n-1}, then
// dzbar_0..dzbar_{n-1}.
EndField basis_derivative(const EndField& f, int basis, int n) {
  return basis < n ? derivative(f, basis, Wirtinger::Dz) : derivative(f, basis - n, Wirtinger::Dzbar);
}

// Coefficient on e_a ^ e_b of (d X + B^X + X^B) (or dB + B^B when x == b).
EndField exterior_component(const OneForm& b, const OneForm& x, int ea, int eb) {
  const int n = x.complex_dim();
  const auto& bc = b.components();
  const auto& xc = x.components();
  return basis_derivative(xc[eb], ea, n) - basis_derivative(xc[ea], eb, n) +
         commutator(bc[ea], xc[eb]) - commutator(bc[eb], xc[ea]);
}

}  // namespace

Connection::Connection(OneForm a, std::string name, Real lambda)
    : a_(std::move(a)), name_(std::move(name)), lambda_(lambda) {}

Connection Connection::constant(Geometry geom, int rank, const std::vector<Mat>& dz,
                                const std::vector<Mat>& dzbar, std::string name) {
  OneForm a(geom, rank);
  for (std::size_t j = 0; j < dz.size(); ++j) a.dz(static_cast<int>(j)) = EndField::constant(geom, dz[j]);
  for (std::size_t j = 0; j < dzbar.size(); ++j)
    a.dzbar(static_cast<int>(j)) = EndField::constant(geom, dzbar[j]);
  return Connection(std::move(a), std::move(name));
}

TwoForm covariant_exterior(const OneForm& b, const OneForm& x) {
  const int n = x.complex_dim();
  TwoForm out(x.geometry(), x.rank(), n > 1, true, n > 1);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) out.dzdzbar(j, k) = exterior_component(b, x, j, n + k);
  if (n > 1) {
    out.dzdz(0, 1) = exterior_component(b, x, 0, 1);
    out.dzbardzbar(0, 1) = exterior_component(b, x, n, n + 1);
  }
  return out;
}

TwoForm curvature_of(const OneForm& b) {
  // dB + B^B = (dB + B^B + B^B) - B^B, so reuse the covariant form with the
  // commutator halved: the coefficient is d_a B_b - d_b B_a + [B_a, B_b].
  const int n = b.complex_dim();
  const auto& c = b.components();
  auto comp = [&](int ea, int eb) {
    return basis_derivative(c[eb], ea, n) - basis_derivative(c[ea], eb, n) + commutator(c[ea], c[eb]);
  };
  TwoForm out(b.geometry(), b.rank(), n > 1, true, n > 1);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) out.dzdzbar(j, k) = comp(j, n + k);
  if (n > 1) {
    out.dzdz(0, 1) = comp(0, 1);
    out.dzbardzbar(0, 1) = comp(n, n + 1);
  }
  return out;
}

OneForm apply_D(const Connection& conn, const EndField& s) {
  OneForm out = exterior_derivative(s);
  out += commutator(conn.form(), s);
  return out;
}

TwoForm apply_D(const Connection& conn, const OneForm& x) { return covariant_exterior(conn.form(), x); }

TwoForm curvature(const Connection& conn) { return curvature_of(conn.form()); }

NhymCertificate validate_nhym(Connection& conn, Real tol) {
  const TwoForm f = curvature(conn);
  NhymCertificate cert;
  cert.tolerance = tol;
  cert.f20 = f.sup_norm({2, 0});
  cert.f02 = f.sup_norm({0, 2});
  if (cert.f20 > tol || cert.f02 > tol)
    throw ValidationError("curvature has (2,0) or (0,2) components: |F20|=" + std::to_string(cert.f20) +
                          " |F02|=" + std::to_string(cert.f02));
  const EndField lam = lambda_contract(f);
  const int r = conn.rank();
  const Complex avg = integrate(lam.trace()) / (conn.grid().volume() * r);
  if (std::abs(avg.imag()) > tol) throw ValidationError("Lambda F has a non-real trace");
  cert.lambda = avg.real();
  cert.lambda_deviation = (lam - Complex(cert.lambda) * EndField::identity(conn.geometry(), r)).sup_norm();
  if (cert.lambda_deviation > tol)
    throw ValidationError("sqrt(-1) Lambda F is not a constant multiple of Id (deviation " +
                          std::to_string(cert.lambda_deviation) + ")");
  conn.stamp(cert);
  return cert;
}

Decomposition decompose(const Connection& conn, const MetricField& h, Real tol, bool verify) {
  Decomposition d;
  d.h = h.field();
  d.h_inv = h.inverse();
  const OneForm& a = conn.form();
  const OneForm adj = form_adjoint(a, d.h, d.h_inv);
  const OneForm dh = exterior_derivative(d.h);
  d.psi = OneForm(conn.geometry(), conn.rank());
  auto& psi = d.psi.components();
  for (std::size_t c = 0; c < psi.size(); ++c)
    psi[c] = 0.5 * (a.components()[c] + adj.components()[c] - d.h_inv * dh.components()[c]);
  d.a_h = a - d.psi;
  if (!verify) return d;

  const DecompositionResiduals res = decomposition_residuals(conn, d);
  const Real scale = 1.0 + d.h.sup_norm() * (1.0 + a.sup_norm()) + dh.sup_norm();
  if (res.self_adjoint > tol * scale || res.compatibility > tol * scale ||
      res.reconstruction > tol * scale)
    throw ValidationError("decomposition invariants violated");
  return d;
}

DecompositionResiduals decomposition_residuals(const Connection& conn, const Decomposition& d) {
  DecompositionResiduals r;
  const auto psi = d.psi.real_components();
  const auto ah = d.a_h.real_components();
  const EndField h_adj = adjoint(d.h);
  for (int axis = 0; axis < static_cast<int>(psi.size()); ++axis) {
    r.self_adjoint = std::max(r.self_adjoint, (d.h * psi[axis] - adjoint(psi[axis]) * d.h).sup_norm());
    const EndField dh = axis_derivative(d.h, axis);
    r.compatibility =
        std::max(r.compatibility, (dh - d.h * ah[axis] - adjoint(ah[axis]) * d.h).sup_norm());
  }
  r.reconstruction = (conn.form() - (d.a_h + d.psi)).sup_norm();
  return r;
}

OneForm apply_DH(const Decomposition& d, const EndField& s) {
  OneForm out = exterior_derivative(s);
  out += commutator(d.a_h, s);
  return out;
}

OneForm apply_Dc(const Decomposition& d, const EndField& s) {
  const int n = d.psi.complex_dim();
  OneForm out(s.geometry(), s.rank());
  for (int j = 0; j < n; ++j) {
    out.dz(j) = commutator(d.psi.dz(j), s) - derivative(s, j, Wirtinger::Dz) -
                commutator(d.a_h.dz(j), s);
    out.dzbar(j) = derivative(s, j, Wirtinger::Dzbar) + commutator(d.a_h.dzbar(j), s) -
                   commutator(d.psi.dzbar(j), s);
  }
  return out;
}

EndField apply_DH_adjoint(const Decomposition& d, const OneForm& x) {
  EndField acc(x.geometry(), x.rank());
  for (int j = 0; j < x.complex_dim(); ++j) {
    acc += derivative(x.dzbar(j), j, Wirtinger::Dz) + commutator(d.a_h.dz(j), x.dzbar(j));
    acc += derivative(x.dz(j), j, Wirtinger::Dzbar) + commutator(d.a_h.dzbar(j), x.dz(j));
  }
  return -2.0 * acc;
}

TwoForm pseudo_curvature(const Decomposition& d) {
  const int n = d.psi.complex_dim();
  // D''_H = dbar + C with C^{1,0} = psi^{1,0}, C^{0,1} = A_H^{0,1}.
  OneForm c(d.psi.geometry(), d.psi.rank());
  for (int j = 0; j < n; ++j) {
    c.dz(j) = d.psi.dz(j);
    c.dzbar(j) = d.a_h.dzbar(j);
  }
  TwoForm g = wedge(c, c);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) g.dzdzbar(j, k) -= derivative(c.dz(j), k, Wirtinger::Dzbar);
  if (n > 1)
    g.dzbardzbar(0, 1) += derivative(c.dzbar(1), 0, Wirtinger::Dzbar) -
                          derivative(c.dzbar(0), 1, Wirtinger::Dzbar);
  return g;
}

TwoForm pseudo_curvature(const Connection& conn, const MetricField& h) {
  return pseudo_curvature(decompose(conn, h));
}

EndField phi(const Decomposition& d) {
  EndField acc(d.psi.geometry(), d.psi.rank());
  for (int j = 0; j < d.psi.complex_dim(); ++j)
    acc += commutator(d.psi.dz(j), d.a_h.dzbar(j)) - derivative(d.psi.dz(j), j, Wirtinger::Dzbar);
  return 8.0 * acc;
}

EndField phi(const Connection& conn, const MetricField& h) { return phi(decompose(conn, h)); }

ScalarField h_norm(const MetricField& h, const EndField& m) {
  const EndField h_inv = h.inverse();
  ScalarField out(m.geometry());
  for_each_node(m.nodes(), [&](Eigen::Index i) {
    const Mat x = m.node(i);
    out[i] = std::sqrt(std::max<Real>(0.0, h_inner(h.node(i), h_inv.node(i), x, x).real()));
  });
  return out;
}

ScalarField h_norm_squared(const EndField& h, const EndField& h_inv, const OneForm& x) {
  ScalarField out(x.geometry());
  for_each_node(h.nodes(), [&](Eigen::Index i) {
    const Mat hm = h.node(i);
    const Mat hi = h_inv.node(i);
    Real acc = 0.0;
    for (const auto& c : x.components()) {
      const Mat v = c.node(i);
      acc += h_inner(hm, hi, v, v).real();
    }
    out[i] = 2.0 * acc;
  });
  return out;
}

Real IdentityReport::max() const {
  Real m = 0.0;
  for (const auto& r : residuals) m = std::max(m, r.value);
  return m;
}

Real IdentityReport::get(const std::string& name) const {
  for (const auto& r : residuals)
    if (r.name == name) return r.value;
  throw Error("unknown identity residual: " + name);
}

IdentityReport check_identities(const Connection& conn, const MetricField& h, std::uint64_t seed,
                                const MetricField* second_metric) {
  if (!conn.certificate()) throw ValidationError("check_identities requires an NHYM certificate");
  const int n = conn.complex_dim();
  const int r = conn.rank();
  const Geometry& geom = conn.geometry();
  const Decomposition d = decompose(conn, h);
  const OneForm& psi = d.psi;
  const OneForm& ah = d.a_h;
  IdentityReport rep;
  auto add = [&](std::string name, Real v) { rep.residuals.push_back({std::move(name), v}); };

  // nabla = d + [A_H, .] on End-valued coefficients.
  auto nabla = [&](const EndField& f, int basis) {
    return basis_derivative(f, basis, n) + commutator(ah.components()[basis], f);
  };

  Real r20 = 0.0, r02 = 0.0, rpsi10 = 0.0, rpsi01 = 0.0;
  if (n > 1) {
    const auto& pc = psi.components();
    const auto& ac = ah.components();
    auto square = [&](int ea, int eb) {
      return basis_derivative(ac[eb], ea, n) - basis_derivative(ac[ea], eb, n) +
             commutator(ac[ea], ac[eb]) + commutator(pc[ea], pc[eb]);
    };
    r20 = square(0, 1).sup_norm();
    r02 = square(n, n + 1).sup_norm();
    rpsi10 = (nabla(pc[1], 0) - nabla(pc[0], 1)).sup_norm();
    rpsi01 = (nabla(pc[n + 1], n) - nabla(pc[n], n + 1)).sup_norm();
  }
  add("del_H^2 + psi10^psi10", r20);
  add("delbar_H^2 + psi01^psi01", r02);
  add("del_H psi10", rpsi10);
  add("delbar_H psi01", rpsi01);

  EndField mixed(geom, r), einstein(geom, r);
  for (int j = 0; j < n; ++j) {
    mixed += nabla(psi.dzbar(j), j) - nabla(psi.dz(j), n + j);
    einstein += derivative(ah.dzbar(j), j, Wirtinger::Dz) - derivative(ah.dz(j), j, Wirtinger::Dzbar) +
                commutator(ah.dz(j), ah.dzbar(j)) + commutator(psi.dz(j), psi.dzbar(j));
  }
  add("Lambda(del_H psi01 + delbar_H psi10)", (2.0 * mixed).sup_norm());
  add("Lambda([del_H,delbar_H] + [psi10,psi01]) - lambda",
      (2.0 * einstein - Complex(conn.lambda()) * EndField::identity(geom, r)).sup_norm());

  const EndField phi_h = phi(d);
  add("Phi H-self-adjoint", (d.h * phi_h - adjoint(phi_h) * d.h).sup_norm());
  add("Kaehler D_H^* psi - 2 Lambda G", (apply_DH_adjoint(d, psi) - 0.5 * phi_h).sup_norm());
  const EndField lam_g = lambda_contract(pseudo_curvature(d));
  add("Phi - 4 Lambda G", (phi_h - 4.0 * lam_g).sup_norm());

  MetricField k_metric;
  if (second_metric) {
    k_metric = *second_metric;
  } else {
    std::mt19937_64 rng(seed);
    k_metric = random_metric(geom, r, 0.6, rng);
  }
  const Decomposition dk = decompose(conn, k_metric);
  const EndField hrel = dk.h_inv * d.h;  // h = K^{-1} H
  const EndField hrel_inv = inverse(hrel);
  const OneForm x = left_multiply(hrel_inv, apply_Dc(dk, hrel));
  Real line1 = 0.0;
  for (int j = 0; j < n; ++j) {
    line1 = std::max(line1, (psi.dz(j) - dk.psi.dz(j) - 0.5 * x.dz(j)).sup_norm());
    line1 = std::max(line1, (ah.dzbar(j) - dk.a_h.dzbar(j) - 0.5 * x.dzbar(j)).sup_norm());
  }
  add("transformation D''_H - D''_K", line1);
  const EndField lam_gk = lambda_contract(pseudo_curvature(dk));
  const EndField rhs = 0.25 * lambda_contract(apply_D(conn, x));
  add("transformation Lambda G_H - Lambda G_K", (lam_g - lam_gk - rhs).sup_norm());
  return rep;
}

}  // namespace nhym
