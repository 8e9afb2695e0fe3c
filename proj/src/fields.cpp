#include "nhym/fields.hpp"

#include <cmath>

#include "pointwise.hpp"

namespace nhym {
namespace {

void require_compatible(const EndField& a, const EndField& b) {
  if (a.rank() != b.rank() || a.nodes() != b.nodes())
    throw GeometryError("end fields have mismatched rank or grid");
}

template <typename Fn>
EndField map_nodes(const EndField& a, int out_rank, Fn&& fn) {
  EndField out(a.geometry(), out_rank);
  for_each_node(a.nodes(), [&](Eigen::Index i) { out.set_node(i, fn(i)); });
  return out;
}

using EigenSolver = Eigen::SelfAdjointEigenSolver<Mat>;

Mat hermitian_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

// ---------------------------------------------------------------------------
// EndField

EndField::EndField(Geometry geom, int rank)
    : geom_(std::move(geom)), rank_(rank),
      data_(ChannelData::Zero(rank * rank, geom_->node_count())) {
  if (rank < 1 || rank > kMaxRank) throw GeometryError("rank out of supported range");
}

EndField::EndField(Geometry geom, int rank, ChannelData data)
    : geom_(std::move(geom)), rank_(rank), data_(std::move(data)) {
  if (rank < 1 || rank > kMaxRank) throw GeometryError("rank out of supported range");
  if (data_.rows() != rank * rank || data_.cols() != geom_->node_count())
    throw GeometryError("end field data does not match rank and grid");
}

EndField EndField::constant(Geometry geom, const Mat& value) {
  if (value.rows() != value.cols()) throw GeometryError("constant end field must be square");
  const int r = static_cast<int>(value.rows());
  EndField f(std::move(geom), r);
  const Eigen::VectorXcd flat = Eigen::Map<const Eigen::VectorXcd>(
      Eigen::MatrixXcd(value).data(), r * r);
  f.data_.colwise() = flat;
  return f;
}

EndField EndField::identity(Geometry geom, int rank) {
  return constant(std::move(geom), Mat::Identity(rank, rank));
}

EndField EndField::scalar(const ScalarField& s, int rank) {
  EndField f(s.geometry(), rank);
  for (int a = 0; a < rank; ++a) f.data_.row(a + a * rank) = s.data().row(0);
  return f;
}

ScalarField EndField::entry(int row, int col) const {
  return {geom_, data_.row(row + col * rank_)};
}

void EndField::set_entry(int row, int col, const ScalarField& f) {
  data_.row(row + col * rank_) = f.data().row(0);
}

ScalarField EndField::trace() const {
  ChannelData t = ChannelData::Zero(1, nodes());
  for (int a = 0; a < rank_; ++a) t.row(0) += data_.row(a + a * rank_);
  return {geom_, std::move(t)};
}

Real EndField::sup_norm() const { return data_.colwise().norm().maxCoeff(); }

EndField& EndField::operator+=(const EndField& o) {
  require_compatible(*this, o);
  data_ += o.data_;
  return *this;
}
EndField& EndField::operator-=(const EndField& o) {
  require_compatible(*this, o);
  data_ -= o.data_;
  return *this;
}
EndField& EndField::operator*=(Complex c) {
  data_ *= c;
  return *this;
}

EndField operator+(EndField a, const EndField& b) { return a += b; }
EndField operator-(EndField a, const EndField& b) { return a -= b; }
EndField operator*(Complex c, EndField a) { return a *= c; }
EndField operator-(EndField a) { return a *= -1.0; }

EndField operator*(const EndField& a, const EndField& b) {
  return detail::zip_nodes([](const auto& x, const auto& y) { return x * y; }, a, b);
}

EndField commutator(const EndField& a, const EndField& b) {
  return detail::zip_nodes([](const auto& x, const auto& y) { return x * y - y * x; }, a, b);
}

EndField adjoint(const EndField& a) {
  return detail::zip_nodes([](const auto& x) { return x.adjoint(); }, a);
}

EndField inverse(const EndField& a) {
  return detail::zip_nodes([](const auto& x) { return x.inverse(); }, a);
}

EndField operator*(const ScalarField& f, const EndField& m) {
  EndField out = m;
  for (Eigen::Index c = 0; c < out.data().rows(); ++c)
    out.data().row(c) = out.data().row(c).cwiseProduct(f.data().row(0));
  return out;
}

EndField derivative(const EndField& f, int j, Wirtinger which, Scheme scheme) {
  return {f.geometry(), f.rank(), wirtinger_derivative(f.grid(), f.data(), j, which, scheme)};
}

EndField axis_derivative(const EndField& f, int axis, Scheme scheme) {
  return {f.geometry(), f.rank(), axis_derivative(f.grid(), f.data(), axis, scheme)};
}

EndField laplacian(const EndField& f) {
  return {f.geometry(), f.rank(), laplacian(f.grid(), f.data())};
}

Mat integrate(const EndField& f) {
  const Eigen::VectorXcd v = integrate(f.grid(), f.data());
  return Eigen::Map<const Eigen::MatrixXcd>(v.data(), f.rank(), f.rank());
}

// ---------------------------------------------------------------------------
// OneForm

OneForm::OneForm(Geometry geom, int rank)
    : geom_(std::move(geom)), n_(geom_->complex_dim()), rank_(rank) {
  comps_.assign(2 * n_, EndField(geom_, rank));
}

std::vector<EndField> OneForm::real_components() const {
  std::vector<EndField> out;
  out.reserve(2 * n_);
  for (int j = 0; j < n_; ++j) {
    out.push_back(dz(j) + dzbar(j));
    out.push_back(kI * (dz(j) - dzbar(j)));
  }
  return out;
}

Real OneForm::sup_norm() const {
  Real m = 0.0;
  for (const auto& c : comps_) m = std::max(m, c.sup_norm());
  return m;
}

OneForm& OneForm::operator+=(const OneForm& o) {
  for (std::size_t c = 0; c < comps_.size(); ++c) comps_[c] += o.comps_.at(c);
  return *this;
}
OneForm& OneForm::operator-=(const OneForm& o) {
  for (std::size_t c = 0; c < comps_.size(); ++c) comps_[c] -= o.comps_.at(c);
  return *this;
}
OneForm& OneForm::operator*=(Complex c) {
  for (auto& comp : comps_) comp *= c;
  return *this;
}

OneForm operator+(OneForm a, const OneForm& b) { return a += b; }
OneForm operator-(OneForm a, const OneForm& b) { return a -= b; }
OneForm operator*(Complex c, OneForm a) { return a *= c; }

OneForm form_adjoint(const OneForm& a, const EndField& h, const EndField& h_inv) {
  OneForm out(a.geometry(), a.rank());
  auto conj = [](const auto& m, const auto& hm, const auto& hi) { return hi * m.adjoint() * hm; };
  for (int j = 0; j < a.complex_dim(); ++j) {
    out.dz(j) = detail::zip_nodes(conj, a.dzbar(j), h, h_inv);
    out.dzbar(j) = detail::zip_nodes(conj, a.dz(j), h, h_inv);
  }
  return out;
}

OneForm form_adjoint(const OneForm& a) {
  OneForm out(a.geometry(), a.rank());
  for (int j = 0; j < a.complex_dim(); ++j) {
    out.dz(j) = adjoint(a.dzbar(j));
    out.dzbar(j) = adjoint(a.dz(j));
  }
  return out;
}

OneForm left_multiply(const EndField& m, const OneForm& a) {
  OneForm out = a;
  for (auto& c : out.components()) c = m * c;
  return out;
}

OneForm right_multiply(const OneForm& a, const EndField& m) {
  OneForm out = a;
  for (auto& c : out.components()) c = c * m;
  return out;
}

OneForm commutator(const OneForm& a, const EndField& m) {
  OneForm out = a;
  for (auto& c : out.components()) c = commutator(c, m);
  return out;
}

OneForm exterior_derivative(const EndField& f, Scheme scheme) {
  OneForm out(f.geometry(), f.rank());
  for (int j = 0; j < out.complex_dim(); ++j) {
    const ChannelData dx = axis_derivative(f.grid(), f.data(), 2 * j, scheme);
    const ChannelData dy = axis_derivative(f.grid(), f.data(), 2 * j + 1, scheme);
    out.dz(j) = EndField(f.geometry(), f.rank(), 0.5 * (dx - kI * dy));
    out.dzbar(j) = EndField(f.geometry(), f.rank(), 0.5 * (dx + kI * dy));
  }
  return out;
}

// ---------------------------------------------------------------------------
// TwoForm

TwoForm::TwoForm(Geometry geom, int rank, bool with20, bool with11, bool with02)
    : geom_(std::move(geom)), n_(geom_->complex_dim()), rank_(rank), with20_(with20),
      with11_(with11), with02_(with02) {
  const int pairs = n_ * (n_ - 1) / 2;
  if (with20_) f20_.assign(pairs, EndField(geom_, rank));
  if (with11_) f11_.assign(n_ * n_, EndField(geom_, rank));
  if (with02_) f02_.assign(pairs, EndField(geom_, rank));
}

bool TwoForm::has(FormType t) const {
  if (t.p == 2 && t.q == 0) return with20_;
  if (t.p == 1 && t.q == 1) return with11_;
  if (t.p == 0 && t.q == 2) return with02_;
  return false;
}

int TwoForm::pair_index(int j, int k) const {
  if (!(0 <= j && j < k && k < n_)) throw GeometryError("2-form pair index must satisfy j < k");
  // n <= 2, so the only pair is (0, 1).
  return 0;
}

Real TwoForm::sup_norm(FormType t) const {
  const std::vector<EndField>* part = nullptr;
  if (t.p == 2 && t.q == 0) part = &f20_;
  if (t.p == 1 && t.q == 1) part = &f11_;
  if (t.p == 0 && t.q == 2) part = &f02_;
  Real m = 0.0;
  if (part)
    for (const auto& c : *part) m = std::max(m, c.sup_norm());
  return m;
}

TwoForm wedge(const OneForm& a, const OneForm& b) {
  const int n = a.complex_dim();
  TwoForm out(a.geometry(), a.rank(), n > 1, true, n > 1);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      out.dzdzbar(j, k) = a.dz(j) * b.dzbar(k) - a.dzbar(k) * b.dz(j);
  if (n > 1) {
    out.dzdz(0, 1) = a.dz(0) * b.dz(1) - a.dz(1) * b.dz(0);
    out.dzbardzbar(0, 1) = a.dzbar(0) * b.dzbar(1) - a.dzbar(1) * b.dzbar(0);
  }
  return out;
}

EndField lambda_contract(const TwoForm& alpha) {
  if (!alpha.has({1, 1})) throw ValidationError("lambda_contract needs a (1,1) form");
  EndField out = alpha.dzdzbar(0, 0);
  for (int j = 1; j < alpha.complex_dim(); ++j) out += alpha.dzdzbar(j, j);
  return 2.0 * out;
}

// ---------------------------------------------------------------------------
// Metrics and matrix functions

void validate_metric(const EndField& h, Real hermitian_tol) {
  detail::with_rank(h.rank(), [&](auto rc) {
    constexpr int R = decltype(rc)::value;
    for (Eigen::Index i = 0; i < h.nodes(); ++i) {
      const detail::Fixed<R> m = detail::load<R>(h, i);
      const Real scale = std::max<Real>(1.0, m.norm());
      if ((m - m.adjoint()).norm() > hermitian_tol * scale)
        throw ValidationError("metric is not Hermitian at node " + std::to_string(i));
      const detail::Fixed<R> sym = 0.5 * (m + m.adjoint());
      Eigen::LLT<detail::Fixed<R>> llt(sym);
      if (llt.info() != Eigen::Success)
        throw ValidationError("metric is not positive definite at node " + std::to_string(i));
    }
  });
}

MetricField::MetricField(EndField h) : h_(std::move(h)) {
  if (!h_.all_finite()) throw ValidationError("metric has non-finite entries");
  validate_metric(h_);
}

MetricField MetricField::identity(Geometry geom, int rank) {
  return MetricField(EndField::identity(std::move(geom), rank));
}

EndField MetricField::inverse() const {
  return detail::zip_nodes(
      [](const auto& m) {
        const auto inv = m.inverse().eval();
        return (0.5 * (inv + inv.adjoint())).eval();
      },
      h_);
}

HermitianRoots hermitian_roots(const Mat& k) {
  EigenSolver es(hermitian_part(k));
  const RVec ev = es.eigenvalues();
  const Mat& u = es.eigenvectors();
  return {u * ev.cwiseSqrt().cast<Complex>().asDiagonal() * u.adjoint(),
          u * ev.cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal() * u.adjoint()};
}

Mat metric_exp(const Mat& k, const Mat& s) {
  const HermitianRoots r = hermitian_roots(k);
  EigenSolver es(hermitian_part(r.sqrt * s * r.inv_sqrt));
  const Mat& u = es.eigenvectors();
  const Mat e = u * es.eigenvalues().array().exp().matrix().cast<Complex>().asDiagonal() *
                u.adjoint();
  return hermitian_part(r.sqrt * e * r.sqrt);
}

Mat metric_log(const Mat& k, const Mat& h) {
  const HermitianRoots r = hermitian_roots(k);
  EigenSolver es(hermitian_part(r.inv_sqrt * h * r.inv_sqrt));
  const Mat& u = es.eigenvectors();
  const Mat l = u * es.eigenvalues().array().log().matrix().cast<Complex>().asDiagonal() *
                u.adjoint();
  return r.inv_sqrt * l * r.sqrt;
}

Real self_adjoint_defect(const Mat& k, const Mat& s) {
  return (k * s - s.adjoint() * k).norm() / (1.0 + k.norm() * s.norm());
}

Complex h_inner(const Mat& h, const Mat& h_inv, const Mat& a, const Mat& b) {
  return (a * h_inv * b.adjoint() * h).trace();
}

Real k_norm(const Mat& k, const Mat& s) {
  return std::sqrt(std::max<Real>(0.0, h_inner(k, k.inverse(), s, s).real()));
}

MetricField metric_exp(const MetricField& k, const EndField& s, Real tol) {
  const EndField& kf = k.field();
  detail::require_same_shape(kf, s);
  EndField out(kf.geometry(), kf.rank());
  detail::with_rank(kf.rank(), [&](auto rc) {
    constexpr int R = decltype(rc)::value;
    using M = detail::Fixed<R>;
    for (Eigen::Index i = 0; i < s.nodes(); ++i) {
      const M km = detail::load<R>(kf, i);
      const M sm = detail::load<R>(s, i);
      if ((km * sm - sm.adjoint() * km).norm() / (1.0 + km.norm() * sm.norm()) > tol)
        throw ValidationError("metric_exp: s is not K-self-adjoint at node " + std::to_string(i));
    }
    // With K = L L^dagger, K exp(s) = L exp(L^dagger s L^{-dagger}) L^dagger and the
    // middle matrix is Hermitian.
    for_each_node(s.nodes(), [&](Eigen::Index i) {
      const M km = detail::load<R>(kf, i);
      const M l = Eigen::LLT<M>(M(0.5 * (km + km.adjoint()))).matrixL();
      const M y0 = l.adjoint() * detail::load<R>(s, i) *
                   l.adjoint().template triangularView<Eigen::Upper>().solve(M::Identity());
      const M y = 0.5 * (y0 + y0.adjoint());
      Eigen::SelfAdjointEigenSolver<M> es(y);
      const M e = es.eigenvectors() *
                  es.eigenvalues().array().exp().matrix().template cast<Complex>().asDiagonal() *
                  es.eigenvectors().adjoint();
      const M h = l * e * l.adjoint();
      detail::slot<R>(out, i) = 0.5 * (h + h.adjoint());
    });
  });
  return MetricField(std::move(out));
}

namespace {

// K^{1/2} and K^{-1/2} for a fixed-size Hermitian positive K.
template <typename M>
std::pair<M, M> fixed_roots(const M& k) {
  Eigen::SelfAdjointEigenSolver<M> es(M(0.5 * (k + k.adjoint())));
  const auto ev = es.eigenvalues().cwiseSqrt().eval();
  const M& u = es.eigenvectors();
  return {u * ev.template cast<Complex>().asDiagonal() * u.adjoint(),
          u * ev.cwiseInverse().template cast<Complex>().asDiagonal() * u.adjoint()};
}

}  // namespace

EndField metric_log(const MetricField& k, const MetricField& h) {
  return detail::zip_nodes(
      [](const auto& km, const auto& hm) {
        using M = std::decay_t<decltype(km)>;
        const auto [root, inv_root] = fixed_roots<M>(km);
        const M c = inv_root * hm * inv_root;
        Eigen::SelfAdjointEigenSolver<M> es(M(0.5 * (c + c.adjoint())));
        const M l = es.eigenvectors() *
                    es.eigenvalues().array().log().matrix().template cast<Complex>().asDiagonal() *
                    es.eigenvectors().adjoint();
        return M(inv_root * l * root);
      },
      k.field(), h.field());
}

ScalarField k_norm(const MetricField& k, const EndField& s) {
  const EndField k_inv = k.inverse();
  return detail::reduce_nodes(
      [](const auto& km, const auto& ki, const auto& sm) -> Complex {
        return std::sqrt(std::max<Real>(0.0, detail::inner(km, ki, sm, sm).real()));
      },
      k.field(), k_inv, s);
}

Real donaldson_kernel(Real x, Real y) {
  const Real d = y - x;
  if (std::abs(d) > 1e-5) return (std::expm1(d) - d) / (d * d);
  return 0.5 + d / 6.0 + d * d / 24.0 + d * d * d / 120.0;
}

namespace {

// Eigen-frame of a K-self-adjoint s at one node: s = T diag(lambda) T^{-1}
// with T = K^{-1/2} U, whose columns are K-orthonormal.
struct KFrame {
  RVec lambda;
  Mat to_frame;    // T^{-1} = U^dagger K^{1/2}
  Mat from_frame;  // T = K^{-1/2} U
};

KFrame k_frame(const Mat& k, const Mat& s) {
  const HermitianRoots r = hermitian_roots(k);
  EigenSolver es(hermitian_part(r.sqrt * s * r.inv_sqrt));
  const Mat& u = es.eigenvectors();
  return {es.eigenvalues(), u.adjoint() * r.sqrt, r.inv_sqrt * u};
}

Mat apply_in_frame(const KFrame& f, const SpectralKernel& kernel, const Mat& v) {
  Mat w = f.to_frame * v * f.from_frame;
  for (Eigen::Index target = 0; target < w.rows(); ++target)
    for (Eigen::Index source = 0; source < w.cols(); ++source) {
      const Real factor = kernel(f.lambda(source), f.lambda(target));
      if (!std::isfinite(factor)) throw ValidationError("kernel returned a non-finite value");
      w(target, source) *= factor;
    }
  return f.from_frame * w * f.to_frame;
}

}  // namespace

EndField kernel_apply(const MetricField& k, const EndField& s, const SpectralKernel& kernel,
                      const EndField& v) {
  require_compatible(s, v);
  return map_nodes(v, v.rank(), [&](Eigen::Index i) {
    return apply_in_frame(k_frame(k.node(i), s.node(i)), kernel, v.node(i));
  });
}

OneForm kernel_apply(const MetricField& k, const EndField& s, const SpectralKernel& kernel,
                     const OneForm& v) {
  OneForm out(v.geometry(), v.rank());
  auto& dst = out.components();
  const auto& src = v.components();
  for_each_node(s.nodes(), [&](Eigen::Index i) {
    const KFrame f = k_frame(k.node(i), s.node(i));
    for (std::size_t c = 0; c < src.size(); ++c)
      dst[c].set_node(i, apply_in_frame(f, kernel, src[c].node(i)));
  });
  return out;
}

Eigen::MatrixXd pointwise_eigenvalues(const MetricField& k, const EndField& u) {
  Eigen::MatrixXd ev(u.rank(), u.nodes());
  for_each_node(u.nodes(), [&](Eigen::Index i) {
    ev.col(i) = k_frame(k.node(i), u.node(i)).lambda;
  });
  return ev;
}

EndField spectral_projector(const MetricField& k, const EndField& u, int count, Real min_gap) {
  const int r = u.rank();
  if (count < 1 || count >= r) throw ValidationError("projector rank must be in [1, rank)");
  EndField out(u.geometry(), r);
  for (Eigen::Index i = 0; i < u.nodes(); ++i) {
    const KFrame f = k_frame(k.node(i), u.node(i));
    const Real gap = f.lambda(count) - f.lambda(count - 1);
    if (!(gap >= min_gap))
      throw ValidationError("spectral gap collapses at node " + std::to_string(i));
    Mat sel = Mat::Zero(r, r);
    for (int a = 0; a < count; ++a) sel(a, a) = 1.0;
    out.set_node(i, f.from_frame * sel * f.to_frame);
  }
  return out;
}

}  // namespace nhym
