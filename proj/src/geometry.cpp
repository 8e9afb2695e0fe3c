#include "nhym/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nhym {
namespace {

// Fourier symbol matrices: M = F^{-1} diag(symbol) F, returned as the real
// part (all symbols used here give real-valued operators).
Eigen::MatrixXd spectral_operator(int size, const std::function<Complex(int)>& symbol) {
  Eigen::MatrixXd m(size, size);
  for (int j = 0; j < size; ++j) {
    for (int l = 0; l < size; ++l) {
      Complex acc = 0.0;
      for (int k = -size / 2; k < size / 2; ++k) {
        const Real phase = 2.0 * kPi * k * (j - l) / size;
        acc += symbol(k) * Complex(std::cos(phase), std::sin(phase));
      }
      m(j, l) = acc.real() / size;
    }
  }
  return m;
}

// Applies `op` (size N_a x N_a) along `axis` of channels x nodes data.
template <typename OpMatrix>
ChannelData apply_along_axis(const TorusGeometry& g, const ChannelData& data, int axis,
                             const OpMatrix& op) {
  const Eigen::Index channels = data.rows();
  const Eigen::Index inner = g.stride(axis) * channels;
  const Eigen::Index len = g.sizes()[axis];
  const Eigen::Index block = inner * len;
  const Eigen::Index outer = data.size() / block;
  ChannelData out(data.rows(), data.cols());
  for (Eigen::Index o = 0; o < outer; ++o) {
    Eigen::Map<const Eigen::MatrixXcd> in(data.data() + o * block, inner, len);
    Eigen::Map<Eigen::MatrixXcd> res(out.data() + o * block, inner, len);
    res.noalias() = in * op.transpose();
  }
  return out;
}

}  // namespace

TorusGeometry::TorusGeometry(int n, std::vector<int> sizes, std::vector<Real> periods)
    : n_(n), sizes_(std::move(sizes)), periods_(std::move(periods)) {
  if (n_ != 1 && n_ != 2) throw GeometryError("complex dimension must be 1 or 2");
  if (static_cast<int>(sizes_.size()) != 2 * n_)
    throw GeometryError("expected " + std::to_string(2 * n_) + " grid sizes");
  if (periods_.empty()) periods_.assign(sizes_.size(), 1.0);
  if (periods_.size() != sizes_.size()) throw GeometryError("period count does not match axes");
  for (std::size_t a = 0; a < sizes_.size(); ++a) {
    if (sizes_[a] < 8) throw GeometryError("grid size below 8 on axis " + std::to_string(a));
    if (sizes_[a] % 2 != 0) throw GeometryError("odd grid size on axis " + std::to_string(a));
    if (!(periods_[a] > 0.0)) throw GeometryError("non-positive period on axis " + std::to_string(a));
  }

  strides_.resize(sizes_.size());
  for (std::size_t a = 0; a < sizes_.size(); ++a) {
    strides_[a] = nodes_;
    nodes_ *= sizes_[a];
    volume_ *= periods_[a];
  }

  for (std::size_t a = 0; a < sizes_.size(); ++a) {
    const int len = sizes_[a];
    const Real kappa = 2.0 * kPi / periods_[a];
    // Nyquist bin is dropped for odd-order derivatives.
    d1_spectral_.push_back(spectral_operator(len, [&](int k) {
      return k == -len / 2 ? Complex(0.0) : kI * (kappa * k);
    }));
    d2_spectral_.push_back(spectral_operator(len, [&](int k) {
      return Complex(-(kappa * k) * (kappa * k));
    }));

    const Real h = spacing(static_cast<int>(a));
    Eigen::MatrixXd c1 = Eigen::MatrixXd::Zero(len, len);
    Eigen::MatrixXd c2 = Eigen::MatrixXd::Zero(len, len);
    for (int j = 0; j < len; ++j) {
      c1(j, (j + 1) % len) += 0.5 / h;
      c1(j, (j + len - 1) % len) -= 0.5 / h;
      c2(j, (j + 1) % len) += 1.0 / (h * h);
      c2(j, (j + len - 1) % len) += 1.0 / (h * h);
      c2(j, j) -= 2.0 / (h * h);
    }
    d1_central_.push_back(std::move(c1));
    d2_central_.push_back(std::move(c2));

    Eigen::MatrixXcd f(len, len), fi(len, len);
    for (int k = 0; k < len; ++k) {
      for (int j = 0; j < len; ++j) {
        const Real phase = 2.0 * kPi * k * j / len;
        f(k, j) = Complex(std::cos(phase), -std::sin(phase));
        fi(j, k) = Complex(std::cos(phase), std::sin(phase)) / static_cast<Real>(len);
      }
    }
    dft_.push_back(std::move(f));
    idft_.push_back(std::move(fi));
  }
}

Real TorusGeometry::min_spacing() const {
  Real h = spacing(0);
  for (int a = 1; a < real_dim(); ++a) h = std::min(h, spacing(a));
  return h;
}

std::vector<int> TorusGeometry::multi_index(Eigen::Index node) const {
  std::vector<int> idx(sizes_.size());
  for (std::size_t a = 0; a < sizes_.size(); ++a) {
    idx[a] = static_cast<int>(node % sizes_[a]);
    node /= sizes_[a];
  }
  return idx;
}

Eigen::Index TorusGeometry::node_index(std::span<const int> multi) const {
  Eigen::Index node = 0;
  for (std::size_t a = 0; a < sizes_.size(); ++a) {
    const int i = ((multi[a] % sizes_[a]) + sizes_[a]) % sizes_[a];
    node += i * strides_[a];
  }
  return node;
}

Real TorusGeometry::coordinate(Eigen::Index node, int axis) const {
  const Eigen::Index i = (node / strides_[axis]) % sizes_[axis];
  return static_cast<Real>(i) * spacing(axis);
}

Real TorusGeometry::wavenumber(int axis, int bin) const {
  const int len = sizes_[axis];
  const int k = bin < len / 2 ? bin : bin - len;
  return 2.0 * kPi * k / periods_[axis];
}

const Eigen::MatrixXd& TorusGeometry::first_derivative_matrix(int axis, Scheme scheme) const {
  return scheme == Scheme::Spectral ? d1_spectral_.at(axis) : d1_central_.at(axis);
}

const Eigen::MatrixXd& TorusGeometry::second_derivative_matrix(int axis, Scheme scheme) const {
  return scheme == Scheme::Spectral ? d2_spectral_.at(axis) : d2_central_.at(axis);
}

std::string TorusGeometry::describe() const {
  std::ostringstream os;
  os << "torus n=" << n_ << " sizes=";
  for (std::size_t a = 0; a < sizes_.size(); ++a) os << (a ? "x" : "") << sizes_[a];
  os << " periods=";
  for (std::size_t a = 0; a < periods_.size(); ++a) os << (a ? "x" : "") << periods_[a];
  return os.str();
}

Geometry make_torus(int n, std::vector<int> sizes, std::vector<Real> periods) {
  return std::make_shared<const TorusGeometry>(n, std::move(sizes), std::move(periods));
}

Geometry make_square_torus(int n, int size_per_axis) {
  return make_torus(n, std::vector<int>(2 * n, size_per_axis));
}

// ---------------------------------------------------------------------------

ChannelData axis_derivative(const TorusGeometry& g, const ChannelData& data, int axis,
                            Scheme scheme) {
  if (axis < 0 || axis >= g.real_dim()) throw GeometryError("axis index out of range");
  return apply_along_axis(g, data, axis, g.first_derivative_matrix(axis, scheme));
}

ChannelData axis_second_derivative(const TorusGeometry& g, const ChannelData& data, int axis,
                                   Scheme scheme) {
  if (axis < 0 || axis >= g.real_dim()) throw GeometryError("axis index out of range");
  return apply_along_axis(g, data, axis, g.second_derivative_matrix(axis, scheme));
}

ChannelData wirtinger_derivative(const TorusGeometry& g, const ChannelData& data, int j,
                                 Wirtinger which, Scheme scheme) {
  if (j < 0 || j >= g.complex_dim()) throw GeometryError("complex axis index out of range");
  const ChannelData dx = axis_derivative(g, data, 2 * j, scheme);
  const ChannelData dy = axis_derivative(g, data, 2 * j + 1, scheme);
  const Complex sign = which == Wirtinger::Dz ? -kI : kI;
  return 0.5 * (dx + sign * dy);
}

ChannelData laplacian(const TorusGeometry& g, const ChannelData& data) {
  ChannelData out = axis_second_derivative(g, data, 0);
  for (int a = 1; a < g.real_dim(); ++a) out += axis_second_derivative(g, data, a);
  return out;
}

Eigen::VectorXcd integrate(const TorusGeometry& g, const ChannelData& data) {
  return data.rowwise().sum() * g.cell_volume();
}

ChannelData dft_all_axes(const TorusGeometry& g, const ChannelData& data, bool inverse) {
  ChannelData out = data;
  for (int a = 0; a < g.real_dim(); ++a)
    out = apply_along_axis(g, out, a, inverse ? g.inverse_dft_matrix(a) : g.dft_matrix(a));
  return out;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(Geometry geom)
    : geom_(std::move(geom)), data_(ChannelData::Zero(1, geom_->node_count())) {}

ScalarField::ScalarField(Geometry geom, ChannelData values)
    : geom_(std::move(geom)), data_(std::move(values)) {
  if (data_.rows() != 1 || data_.cols() != geom_->node_count())
    throw GeometryError("scalar field size does not match geometry");
}

ScalarField ScalarField::constant(Geometry geom, Complex c) {
  ScalarField f(std::move(geom));
  f.data_.setConstant(c);
  return f;
}

ScalarField ScalarField::from_function(Geometry geom,
                                       const std::function<Complex(std::span<const Real>)>& fn) {
  ScalarField f(geom);
  std::vector<Real> x(geom->real_dim());
  for (Eigen::Index i = 0; i < geom->node_count(); ++i) {
    for (int a = 0; a < geom->real_dim(); ++a) x[a] = geom->coordinate(i, a);
    f.data_(0, i) = fn(x);
  }
  return f;
}

Real ScalarField::sup_norm() const { return data_.cwiseAbs().maxCoeff(); }
Complex ScalarField::mean() const { return data_.mean(); }
bool ScalarField::all_finite() const { return data_.allFinite(); }

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  data_ += o.data_;
  return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& o) {
  data_ -= o.data_;
  return *this;
}
ScalarField& ScalarField::operator*=(Complex c) {
  data_ *= c;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(Complex c, ScalarField a) { return a *= c; }

ScalarField derivative(const ScalarField& f, int j, Wirtinger which, Scheme scheme) {
  return {f.geometry(), wirtinger_derivative(f.grid(), f.data(), j, which, scheme)};
}

ScalarField laplacian(const ScalarField& f) {
  return {f.geometry(), laplacian(f.grid(), f.data())};
}

Complex integrate(const ScalarField& f) { return integrate(f.grid(), f.data())(0); }

ScalarField poisson_solve(const ScalarField& f, Real mean_tolerance) {
  const TorusGeometry& g = f.grid();
  if (std::abs(integrate(f)) > mean_tolerance * g.volume())
    throw ValidationError("poisson_solve: right-hand side has nonzero mean");
  ChannelData hat = dft_all_axes(g, f.data(), false);
  for (Eigen::Index i = 0; i < g.node_count(); ++i) {
    const std::vector<int> bins = g.multi_index(i);
    Real k2 = 0.0;
    for (int a = 0; a < g.real_dim(); ++a) {
      const Real k = g.wavenumber(a, bins[a]);
      k2 += k * k;
    }
    hat(0, i) = k2 == 0.0 ? Complex(0.0) : -hat(0, i) / k2;
  }
  return {f.geometry(), dft_all_axes(g, hat, true)};
}

ScalarField composite_laplacian(const ScalarField& f, Real dc_sign) {
  const TorusGeometry& g = f.grid();
  // d^c f = dc_sign (dbar f - d f): the dz_j coefficient is -dc_sign f_{z_j},
  // the dzbar_j coefficient is dc_sign f_{zbar_j}. The (1,1) part of d(d^c f)
  // on dz_j ^ dzbar_j is d_j(dzbar coeff) - dbar_j(dz coeff).
  ChannelData lam = ChannelData::Zero(1, g.node_count());
  for (int j = 0; j < g.complex_dim(); ++j) {
    const ChannelData c10 = -dc_sign * wirtinger_derivative(g, f.data(), j, Wirtinger::Dz);
    const ChannelData c01 = dc_sign * wirtinger_derivative(g, f.data(), j, Wirtinger::Dzbar);
    const ChannelData diag = wirtinger_derivative(g, c01, j, Wirtinger::Dz) -
                             wirtinger_derivative(g, c10, j, Wirtinger::Dzbar);
    lam += 2.0 * diag;
  }
  return {f.geometry(), lam};
}

}  // namespace nhym
