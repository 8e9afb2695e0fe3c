#include "nhym/random_fields.hpp"

#include <cmath>

namespace nhym {
namespace {

// All integer wave vectors with components in [-m, m].
std::vector<std::vector<int>> wave_vectors(int dims, int m) {
  std::vector<std::vector<int>> out{{}};
  for (int a = 0; a < dims; ++a) {
    std::vector<std::vector<int>> next;
    for (const auto& v : out)
      for (int k = -m; k <= m; ++k) {
        auto w = v;
        w.push_back(k);
        next.push_back(std::move(w));
      }
    out = std::move(next);
  }
  return out;
}

Mat random_hermitian(int r, std::mt19937_64& rng) {
  std::normal_distribution<Real> normal(0.0, 1.0);
  Mat m(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) m(i, j) = Complex(normal(rng), normal(rng));
  return 0.5 * (m + m.adjoint());
}

}  // namespace

EndField random_hermitian_field(const Geometry& geom, int rank, Real amplitude, int max_mode,
                                std::mt19937_64& rng) {
  const auto modes = wave_vectors(geom->real_dim(), max_mode);
  EndField out(geom, rank);
  std::vector<Real> x(geom->real_dim());
  std::vector<std::pair<Mat, Mat>> coeffs;
  for (std::size_t m = 0; m < modes.size(); ++m)
    coeffs.emplace_back(random_hermitian(rank, rng), random_hermitian(rank, rng));
  for (Eigen::Index i = 0; i < geom->node_count(); ++i) {
    Mat acc = Mat::Zero(rank, rank);
    for (std::size_t m = 0; m < modes.size(); ++m) {
      Real phase = 0.0;
      for (int a = 0; a < geom->real_dim(); ++a)
        phase += 2.0 * kPi * modes[m][a] * geom->coordinate(i, a) / geom->periods()[a];
      acc += std::cos(phase) * coeffs[m].first + std::sin(phase) * coeffs[m].second;
    }
    out.set_node(i, acc);
  }
  const Real sup = out.sup_norm();
  if (sup > 0.0) out *= amplitude / sup;
  return out;
}

ScalarField random_scalar_field(const Geometry& geom, Real amplitude, int max_mode,
                                std::mt19937_64& rng, bool real_valued) {
  std::normal_distribution<Real> normal(0.0, 1.0);
  const auto modes = wave_vectors(geom->real_dim(), max_mode);
  std::vector<std::pair<Complex, Complex>> coeffs;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const Complex c(normal(rng), real_valued ? 0.0 : normal(rng));
    const Complex s(normal(rng), real_valued ? 0.0 : normal(rng));
    coeffs.emplace_back(c, s);
  }
  ScalarField out(geom);
  for (Eigen::Index i = 0; i < geom->node_count(); ++i) {
    Complex acc = 0.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      Real phase = 0.0;
      for (int a = 0; a < geom->real_dim(); ++a)
        phase += 2.0 * kPi * modes[m][a] * geom->coordinate(i, a) / geom->periods()[a];
      acc += std::cos(phase) * coeffs[m].first + std::sin(phase) * coeffs[m].second;
    }
    out[i] = acc;
  }
  const Real sup = out.sup_norm();
  if (sup > 0.0) out *= amplitude / sup;
  return out;
}

MetricField random_metric(const Geometry& geom, int rank, Real amplitude, std::mt19937_64& rng,
                          int max_mode) {
  const EndField s = random_hermitian_field(geom, rank, amplitude, max_mode, rng);
  return metric_exp(MetricField::identity(geom, rank), s);
}

EndField random_self_adjoint(const MetricField& k, Real amplitude, std::mt19937_64& rng,
                             int max_mode) {
  const EndField x = random_hermitian_field(k.geometry(), k.rank(), 1.0, max_mode, rng);
  EndField s(k.geometry(), k.rank());
  Real sup = 0.0;
  for (Eigen::Index i = 0; i < s.nodes(); ++i) {
    const HermitianRoots r = hermitian_roots(k.node(i));
    const Mat v = r.inv_sqrt * x.node(i) * r.sqrt;
    s.set_node(i, v);
    sup = std::max(sup, k_norm(k.node(i), v));
  }
  if (sup > 0.0) s *= amplitude / sup;
  return s;
}

}  // namespace nhym
