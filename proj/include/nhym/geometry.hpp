#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "nhym/types.hpp"

namespace nhym {

/// Discretization used for first derivatives. Spectral is the production
/// scheme; central differences exist as a cross-check.
enum class Scheme { Spectral, CentralDifference };

/// Which Wirtinger derivative: d/dz_j = (d/dx_j - i d/dy_j)/2 or
/// d/dzbar_j = (d/dx_j + i d/dy_j)/2.
enum class Wirtinger { Dz, Dzbar };

/// Flat complex torus of complex dimension n (1 or 2) sampled on a uniform
/// periodic grid. Real axes are ordered (x_1, y_1, ..., x_n, y_n) with
/// z_j = x_j + i y_j; axis 0 varies fastest in the node numbering.
///
/// The Kaehler form is the standard flat one, so the Ricci curvature is
/// identically zero and the volume form is the Lebesgue measure.
class TorusGeometry {
 public:
  TorusGeometry(int n, std::vector<int> sizes, std::vector<Real> periods);

  int complex_dim() const { return n_; }
  int real_dim() const { return 2 * n_; }
  const std::vector<int>& sizes() const { return sizes_; }
  const std::vector<Real>& periods() const { return periods_; }
  Real spacing(int axis) const { return periods_[axis] / sizes_[axis]; }
  Real min_spacing() const;
  Real volume() const { return volume_; }
  Eigen::Index node_count() const { return nodes_; }
  Real cell_volume() const { return volume_ / static_cast<Real>(nodes_); }

  /// Node stride along an axis (product of the sizes of faster axes).
  Eigen::Index stride(int axis) const { return strides_[axis]; }
  std::vector<int> multi_index(Eigen::Index node) const;
  Eigen::Index node_index(std::span<const int> multi) const;
  Real coordinate(Eigen::Index node, int axis) const;

  /// Angular wavenumber 2*pi*k/L for DFT bin `bin` (k in [-N/2, N/2)).
  Real wavenumber(int axis, int bin) const;

  const Eigen::MatrixXd& first_derivative_matrix(int axis, Scheme scheme) const;
  const Eigen::MatrixXd& second_derivative_matrix(int axis, Scheme scheme) const;
  const Eigen::MatrixXcd& dft_matrix(int axis) const { return dft_[axis]; }
  const Eigen::MatrixXcd& inverse_dft_matrix(int axis) const { return idft_[axis]; }

  /// Short textual descriptor used in snapshot headers and summaries.
  std::string describe() const;

 private:
  int n_;
  std::vector<int> sizes_;
  std::vector<Real> periods_;
  std::vector<Eigen::Index> strides_;
  Eigen::Index nodes_ = 1;
  Real volume_ = 1.0;
  std::vector<Eigen::MatrixXd> d1_spectral_, d2_spectral_, d1_central_, d2_central_;
  std::vector<Eigen::MatrixXcd> dft_, idft_;
};

using Geometry = std::shared_ptr<const TorusGeometry>;

/// Builds a torus. Throws GeometryError for n outside {1,2}, odd or
/// undersized (< 8) grids, non-positive periods or a wrong axis count.
Geometry make_torus(int n, std::vector<int> sizes, std::vector<Real> periods = {});

/// Convenience: every axis with the same size and unit period.
Geometry make_square_torus(int n, int size_per_axis);

// ---------------------------------------------------------------------------
// Channel-level operators. `data` is channels x nodes; every channel is
// differentiated independently.

ChannelData axis_derivative(const TorusGeometry& g, const ChannelData& data, int axis,
                            Scheme scheme = Scheme::Spectral);
ChannelData axis_second_derivative(const TorusGeometry& g, const ChannelData& data, int axis,
                                   Scheme scheme = Scheme::Spectral);
ChannelData wirtinger_derivative(const TorusGeometry& g, const ChannelData& data, int j,
                                 Wirtinger which, Scheme scheme = Scheme::Spectral);
ChannelData laplacian(const TorusGeometry& g, const ChannelData& data);
/// Per-channel integral over the torus.
Eigen::VectorXcd integrate(const TorusGeometry& g, const ChannelData& data);
/// Multi-dimensional DFT along every axis (sign -1) or its inverse.
ChannelData dft_all_axes(const TorusGeometry& g, const ChannelData& data, bool inverse);

// ---------------------------------------------------------------------------

/// Complex value per grid node.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(Geometry geom);
  ScalarField(Geometry geom, ChannelData values);

  static ScalarField constant(Geometry geom, Complex c);
  static ScalarField from_function(Geometry geom,
                                   const std::function<Complex(std::span<const Real>)>& f);

  const Geometry& geometry() const { return geom_; }
  const TorusGeometry& grid() const { return *geom_; }
  Eigen::Index size() const { return data_.cols(); }
  Complex operator[](Eigen::Index i) const { return data_(0, i); }
  Complex& operator[](Eigen::Index i) { return data_(0, i); }
  const ChannelData& data() const { return data_; }
  ChannelData& data() { return data_; }

  Real sup_norm() const;
  Complex mean() const;
  bool all_finite() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(Complex c);

 private:
  Geometry geom_;
  ChannelData data_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(Complex c, ScalarField a);

ScalarField derivative(const ScalarField& f, int j, Wirtinger which,
                       Scheme scheme = Scheme::Spectral);
ScalarField laplacian(const ScalarField& f);
Complex integrate(const ScalarField& f);

/// Solves laplacian(u) = f for mean-zero u. Throws ValidationError when
/// |integrate(f)| exceeds mean_tolerance * volume.
ScalarField poisson_solve(const ScalarField& f, Real mean_tolerance = 1e-9);

/// Laplacian assembled as sqrt(-1) Lambda d d^c f from Wirtinger derivatives,
/// with d^c = dc_sign * (dbar - d). dc_sign = +1 is the pinned convention;
/// -1 exists only as a negative control for the calibration suite.
ScalarField composite_laplacian(const ScalarField& f, Real dc_sign = 1.0);

}  // namespace nhym
