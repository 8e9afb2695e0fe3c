#pragma once

#include <array>
#include <functional>
#include <vector>

#include "nhym/geometry.hpp"

namespace nhym {

/// Runs fn(node) for every node. Iterations must be independent.
template <typename Fn>
void for_each_node(Eigen::Index count, Fn&& fn) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (Eigen::Index i = 0; i < count; ++i) fn(i);
}

/// Field of r x r complex matrices (sections of End E on the trivial bundle).
class EndField {
 public:
  EndField() = default;
  EndField(Geometry geom, int rank);
  EndField(Geometry geom, int rank, ChannelData data);

  static EndField constant(Geometry geom, const Mat& value);
  static EndField identity(Geometry geom, int rank);
  /// Scalar field times the identity.
  static EndField scalar(const ScalarField& f, int rank);

  const Geometry& geometry() const { return geom_; }
  const TorusGeometry& grid() const { return *geom_; }
  int rank() const { return rank_; }
  Eigen::Index nodes() const { return data_.cols(); }

  Mat node(Eigen::Index i) const {
    return Eigen::Map<const Eigen::MatrixXcd>(data_.col(i).data(), rank_, rank_);
  }
  void set_node(Eigen::Index i, const Mat& m) {
    Eigen::Map<Eigen::MatrixXcd>(data_.col(i).data(), rank_, rank_) = m;
  }
  /// Entry (row, col) across all nodes.
  ScalarField entry(int row, int col) const;
  void set_entry(int row, int col, const ScalarField& f);

  const ChannelData& data() const { return data_; }
  ChannelData& data() { return data_; }

  ScalarField trace() const;
  /// Max over nodes of the Frobenius norm.
  Real sup_norm() const;
  bool all_finite() const { return data_.allFinite(); }

  EndField& operator+=(const EndField& o);
  EndField& operator-=(const EndField& o);
  EndField& operator*=(Complex c);

 private:
  Geometry geom_;
  int rank_ = 0;
  ChannelData data_;
};

EndField operator+(EndField a, const EndField& b);
EndField operator-(EndField a, const EndField& b);
EndField operator*(Complex c, EndField a);
EndField operator-(EndField a);

/// Pointwise matrix product, commutator, conjugate transpose and inverse.
EndField operator*(const EndField& a, const EndField& b);
EndField commutator(const EndField& a, const EndField& b);
EndField adjoint(const EndField& a);
EndField inverse(const EndField& a);
/// Pointwise f(x) * M(x).
EndField operator*(const ScalarField& f, const EndField& m);

EndField derivative(const EndField& f, int j, Wirtinger which, Scheme scheme = Scheme::Spectral);
EndField axis_derivative(const EndField& f, int axis, Scheme scheme = Scheme::Spectral);
EndField laplacian(const EndField& f);
/// Componentwise integral.
Mat integrate(const EndField& f);

/// End-valued 1-form: coefficients on dz_1..dz_n and dzbar_1..dzbar_n.
class OneForm {
 public:
  OneForm() = default;
  OneForm(Geometry geom, int rank);

  const Geometry& geometry() const { return geom_; }
  int complex_dim() const { return n_; }
  int rank() const { return rank_; }

  EndField& dz(int j) { return comps_.at(j); }
  const EndField& dz(int j) const { return comps_.at(j); }
  EndField& dzbar(int j) { return comps_.at(n_ + j); }
  const EndField& dzbar(int j) const { return comps_.at(n_ + j); }
  /// All 2n components, dz block first.
  std::vector<EndField>& components() { return comps_; }
  const std::vector<EndField>& components() const { return comps_; }

  /// Components against dx_1, dy_1, ..., dx_n, dy_n.
  std::vector<EndField> real_components() const;
  /// Max over nodes and components of the Frobenius norm.
  Real sup_norm() const;

  OneForm& operator+=(const OneForm& o);
  OneForm& operator-=(const OneForm& o);
  OneForm& operator*=(Complex c);

 private:
  Geometry geom_;
  int n_ = 0;
  int rank_ = 0;
  std::vector<EndField> comps_;
};

OneForm operator+(OneForm a, const OneForm& b);
OneForm operator-(OneForm a, const OneForm& b);
OneForm operator*(Complex c, OneForm a);

/// Conjugation of an End-valued 1-form with respect to H: each coefficient
/// goes to H^{-1} M^dagger H and dz/dzbar are swapped. With H = Id this is
/// the plain form adjoint A^dagger.
OneForm form_adjoint(const OneForm& a, const EndField& h, const EndField& h_inv);
OneForm form_adjoint(const OneForm& a);

/// Pointwise left/right multiplication and commutator of a 1-form with an
/// End field, per component.
OneForm left_multiply(const EndField& m, const OneForm& a);
OneForm right_multiply(const OneForm& a, const EndField& m);
OneForm commutator(const OneForm& a, const EndField& m);

/// Exterior derivative of an End field: (d f)_j = df/dz_j, (d f)_jbar = df/dzbar_j.
OneForm exterior_derivative(const EndField& f, Scheme scheme = Scheme::Spectral);

/// Bidegree of a 2-form part.
struct FormType {
  int p = 0;
  int q = 0;
};

/// End-valued 2-form split by type: (2,0) on dz_j^dz_k (j<k), (1,1) on
/// dz_j^dzbar_k (all j,k), (0,2) on dzbar_j^dzbar_k (j<k). A part may be
/// absent, in which case it is treated as zero but reported as untyped.
class TwoForm {
 public:
  TwoForm() = default;
  TwoForm(Geometry geom, int rank, bool with20, bool with11, bool with02);

  const Geometry& geometry() const { return geom_; }
  int complex_dim() const { return n_; }
  int rank() const { return rank_; }
  bool has(FormType t) const;

  EndField& dzdzbar(int j, int k) { return f11_.at(j * n_ + k); }
  const EndField& dzdzbar(int j, int k) const { return f11_.at(j * n_ + k); }
  /// (2,0) coefficient for j < k (n = 2 only).
  EndField& dzdz(int j, int k) { return f20_.at(pair_index(j, k)); }
  const EndField& dzdz(int j, int k) const { return f20_.at(pair_index(j, k)); }
  EndField& dzbardzbar(int j, int k) { return f02_.at(pair_index(j, k)); }
  const EndField& dzbardzbar(int j, int k) const { return f02_.at(pair_index(j, k)); }

  const std::vector<EndField>& part20() const { return f20_; }
  const std::vector<EndField>& part11() const { return f11_; }
  const std::vector<EndField>& part02() const { return f02_; }
  std::vector<EndField>& part20() { return f20_; }
  std::vector<EndField>& part11() { return f11_; }
  std::vector<EndField>& part02() { return f02_; }

  Real sup_norm(FormType t) const;

 private:
  int pair_index(int j, int k) const;

  Geometry geom_;
  int n_ = 0;
  int rank_ = 0;
  bool with20_ = false, with11_ = false, with02_ = false;
  std::vector<EndField> f20_, f11_, f02_;
};

/// Wedge product of two End-valued 1-forms, all three parts.
TwoForm wedge(const OneForm& a, const OneForm& b);

/// sqrt(-1) Lambda_omega on the (1,1) part: alpha -> 2 sum_j alpha_{j jbar}.
/// Throws ValidationError if the form carries no (1,1) part.
EndField lambda_contract(const TwoForm& alpha);

/// Pointwise Hermitian positive-definite matrix field.
class MetricField {
 public:
  MetricField() = default;
  /// Validates Hermiticity (1e-12 relative) and positivity at every node.
  explicit MetricField(EndField h);

  static MetricField identity(Geometry geom, int rank);

  const EndField& field() const { return h_; }
  const Geometry& geometry() const { return h_.geometry(); }
  int rank() const { return h_.rank(); }
  Mat node(Eigen::Index i) const { return h_.node(i); }
  EndField inverse() const;

 private:
  EndField h_;
};

/// Throws ValidationError if some node is not Hermitian positive definite.
void validate_metric(const EndField& h, Real hermitian_tol = 1e-12);

// ---------------------------------------------------------------------------
// Pointwise matrix functions.

/// Hermitian square root and its inverse.
struct HermitianRoots {
  Mat sqrt;
  Mat inv_sqrt;
};
HermitianRoots hermitian_roots(const Mat& k);

/// K exp(s) for K-self-adjoint s, built as K^{1/2} exp(K^{1/2} s K^{-1/2}) K^{1/2}.
Mat metric_exp(const Mat& k, const Mat& s);
/// log(K^{-1} H) through the Hermitian matrix K^{-1/2} H K^{-1/2}.
Mat metric_log(const Mat& k, const Mat& h);
/// Real residual of K s - s^dagger K, relative to (1 + |K||s|).
Real self_adjoint_defect(const Mat& k, const Mat& s);
/// K-Frobenius norm sqrt(tr(s K^{-1} s^dagger K)).
Real k_norm(const Mat& k, const Mat& s);
/// H-inner product tr(a H^{-1} b^dagger H).
Complex h_inner(const Mat& h, const Mat& h_inv, const Mat& a, const Mat& b);

/// Throws ValidationError unless s is K-self-adjoint within tol.
MetricField metric_exp(const MetricField& k, const EndField& s, Real tol = 1e-8);
EndField metric_log(const MetricField& k, const MetricField& h);

/// Pointwise K-Frobenius norm field of s.
ScalarField k_norm(const MetricField& k, const EndField& s);

/// Two-variable spectral kernel applied to End-valued data.
using SpectralKernel = std::function<Real(Real source, Real target)>;

/// (e^{y-x} - (y-x) - 1)/(y-x)^2 with a Taylor branch near the diagonal.
Real donaldson_kernel(Real x, Real y);

/// In a K-orthonormal eigenbasis of s (eigenvalues lambda_i), the component of
/// V mapping e_i to e_j is multiplied by kernel(lambda_i, lambda_j).
EndField kernel_apply(const MetricField& k, const EndField& s, const SpectralKernel& kernel,
                      const EndField& v);
OneForm kernel_apply(const MetricField& k, const EndField& s, const SpectralKernel& kernel,
                     const OneForm& v);

/// Ascending eigenvalues of the K-self-adjoint field u at every node
/// (rank x nodes).
Eigen::MatrixXd pointwise_eigenvalues(const MetricField& k, const EndField& u);

/// K-orthogonal projector onto the eigenspaces of the `count` smallest
/// eigenvalues of u. Throws ValidationError where the gap between eigenvalue
/// `count` and `count+1` falls below min_gap.
EndField spectral_projector(const MetricField& k, const EndField& u, int count,
                            Real min_gap = 1e-8);

}  // namespace nhym
