#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nhym/fields.hpp"

namespace nhym {

/// Residuals recorded when a connection passes the NHYM test.
struct NhymCertificate {
  Real lambda = 0.0;            ///< measured Einstein constant
  Real f20 = 0.0;               ///< sup |F^{2,0}|
  Real f02 = 0.0;               ///< sup |F^{0,2}|
  Real lambda_deviation = 0.0;  ///< sup |sqrt(-1) Lambda F - lambda Id|
  Real tolerance = 0.0;
};

/// Connection D = d + A on the trivial rank-r bundle over the torus. The
/// dz components of `form()` are A^{1,0}, the dzbar components A^{0,1}.
class Connection {
 public:
  Connection() = default;
  Connection(OneForm a, std::string name = "custom", Real lambda = 0.0);

  /// Constant-coefficient connection from per-component matrices (missing
  /// components are zero). `dz[j]` multiplies dz_j, `dzbar[j]` multiplies dzbar_j.
  static Connection constant(Geometry geom, int rank, const std::vector<Mat>& dz,
                             const std::vector<Mat>& dzbar, std::string name = "custom");

  const Geometry& geometry() const { return a_.geometry(); }
  const TorusGeometry& grid() const { return *a_.geometry(); }
  int rank() const { return a_.rank(); }
  int complex_dim() const { return a_.complex_dim(); }
  const OneForm& form() const { return a_; }
  const std::string& name() const { return name_; }
  Real lambda() const { return lambda_; }

  const std::optional<NhymCertificate>& certificate() const { return certificate_; }
  void stamp(const NhymCertificate& c) {
    certificate_ = c;
    lambda_ = c.lambda;
  }

 private:
  OneForm a_;
  std::string name_;
  Real lambda_ = 0.0;
  std::optional<NhymCertificate> certificate_;
};

/// D = D_H + psi_H for a metric H, with the coefficient fields cached.
struct Decomposition {
  EndField h;
  EndField h_inv;
  OneForm a_h;  ///< connection form of the H-unitary part D_H
  OneForm psi;  ///< H-self-adjoint part psi_H
};

/// Covariant exterior derivative of an End-valued 1-form X for the connection
/// form B acting by commutator: (d X + B^X + X^B).
TwoForm covariant_exterior(const OneForm& b, const OneForm& x);
/// Curvature dB + B^B of a connection form.
TwoForm curvature_of(const OneForm& b);

/// D s = d s + [A, s].
OneForm apply_D(const Connection& conn, const EndField& s);
/// D acting on an End-valued 1-form.
TwoForm apply_D(const Connection& conn, const OneForm& x);
TwoForm curvature(const Connection& conn);

/// Checks F^{2,0} = F^{0,2} = 0 and sqrt(-1) Lambda F = lambda Id with a
/// single real constant lambda. On success stamps the certificate on `conn`
/// and returns it; otherwise throws ValidationError.
NhymCertificate validate_nhym(Connection& conn, Real tol = 1e-8);

/// psi_H = (A + H^{-1} A^dagger H - H^{-1} dH)/2 per component, A_H = A - psi_H.
/// With `verify`, throws ValidationError if the decomposition invariants fail
/// (tolerance is relative to the field magnitudes).
Decomposition decompose(const Connection& conn, const MetricField& h, Real tol = 1e-10,
                        bool verify = true);

/// Invariant residuals of a decomposition.
struct DecompositionResiduals {
  Real self_adjoint = 0.0;  ///< H psi_a - psi_a^dagger H over real components a
  Real compatibility = 0.0; ///< d_a H - H A_{H,a} - A_{H,a}^dagger H
  Real reconstruction = 0.0;
};
DecompositionResiduals decomposition_residuals(const Connection& conn, const Decomposition& d);

/// D_H acting on End fields and on End-valued 1-forms.
OneForm apply_DH(const Decomposition& d, const EndField& s);
/// D^c_H = D''_H - D'_H acting on End fields.
OneForm apply_Dc(const Decomposition& d, const EndField& s);
/// Formal L2 adjoint of D_H on End-valued 1-forms: -2 sum_j (nabla_j X_jbar + nabla_jbar X_j).
EndField apply_DH_adjoint(const Decomposition& d, const OneForm& x);

/// G_H = (D''_H)^2, all three type components.
TwoForm pseudo_curvature(const Decomposition& d);
TwoForm pseudo_curvature(const Connection& conn, const MetricField& h);

/// Phi(H) = 4 sqrt(-1) Lambda G_H.
EndField phi(const Decomposition& d);
EndField phi(const Connection& conn, const MetricField& h);

/// Pointwise |M|_H = sqrt(tr(M H^{-1} M^dagger H)).
ScalarField h_norm(const MetricField& h, const EndField& m);
/// Pointwise |X|^2_{H,omega} = 2 sum over components |X_c|^2_H.
ScalarField h_norm_squared(const EndField& h, const EndField& h_inv, const OneForm& x);

/// One named residual of the identity checker.
struct IdentityResidual {
  std::string name;
  Real value = 0.0;
};

struct IdentityReport {
  std::vector<IdentityResidual> residuals;
  Real max() const;
  Real get(const std::string& name) const;
};

/// Sup-norm residuals of the pseudo-curvature identity system, the metric
/// transformation law (against a random second metric drawn from `seed`) and
/// the Kaehler identity D_H^* psi_H = 2 sqrt(-1) Lambda G_H.
/// `second_metric` overrides the random metric when given.
IdentityReport check_identities(const Connection& conn, const MetricField& h, std::uint64_t seed,
                                const MetricField* second_metric = nullptr);

}  // namespace nhym
