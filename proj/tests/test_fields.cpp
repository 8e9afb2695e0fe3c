#include <cmath>
#include <random>

#include "doctest.h"
#include "nhym/fields.hpp"
#include "nhym/random_fields.hpp"

using namespace nhym;

namespace {

Mat diag2(Complex a, Complex b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Real max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("lambda_contract follows the pinned normalisation") {
  const Geometry g1 = make_square_torus(1, 8);
  TwoForm a(g1, 2, false, true, false);
  const Mat c = diag2(Complex(1.0, 2.0), -3.0);
  a.dzdzbar(0, 0) = EndField::constant(g1, c);
  CHECK(max_abs(lambda_contract(a).node(5) - 2.0 * c) < 1e-15);

  const Geometry g2 = make_square_torus(2, 8);
  TwoForm b(g2, 2, false, true, false);
  for (auto& comp : b.part11()) comp = EndField(g2, 2);
  b.dzdzbar(0, 1) = EndField::constant(g2, c);
  CHECK(lambda_contract(b).sup_norm() == 0.0);

  TwoForm untyped(g1, 2, true, false, false);
  CHECK_THROWS_AS(lambda_contract(untyped), ValidationError);
}

TEST_CASE("wedge of dz and dzbar coefficients") {
  const Geometry g = make_square_torus(1, 8);
  OneForm x(g, 1), y(g, 1);
  x.dz(0) = EndField::constant(g, Mat::Constant(1, 1, 2.0));
  x.dzbar(0) = EndField(g, 1);
  y.dz(0) = EndField(g, 1);
  y.dzbar(0) = EndField::constant(g, Mat::Constant(1, 1, Complex(0.0, 3.0)));
  const TwoForm w = wedge(x, y);
  CHECK(std::abs(w.dzdzbar(0, 0).node(0)(0, 0) - Complex(0.0, 6.0)) < 1e-15);
}

TEST_CASE("metric_exp and metric_log on the documented examples") {
  const Mat id = Mat::Identity(2, 2);
  CHECK(max_abs(metric_exp(id, diag2(std::log(2.0), -std::log(2.0))) - diag2(2.0, 0.5)) < 1e-14);
  CHECK(max_abs(metric_log(id, diag2(std::exp(1.0), std::exp(-1.0))) - diag2(1.0, -1.0)) < 1e-14);

  const Geometry g = make_square_torus(1, 8);
  std::mt19937_64 rng(11);
  const MetricField k = random_metric(g, 2, 0.8, rng);
  CHECK((metric_exp(k, EndField(g, 2)).field() - k.field()).sup_norm() < 1e-14);
  CHECK(metric_log(k, k).sup_norm() < 1e-12);
}

TEST_CASE("metric_log inverts metric_exp and matches log det") {
  const Geometry g = make_square_torus(1, 8);
  std::mt19937_64 rng(5);
  for (int rank : {2, 3}) {
    const MetricField k = random_metric(g, rank, 0.7, rng);
    const EndField s = random_self_adjoint(k, 3.0, rng);
    const MetricField h = metric_exp(k, s);
    CHECK((metric_log(k, h) - s).sup_norm() < 1e-10);

    const EndField back = metric_log(k, h);
    for (Eigen::Index i = 0; i < g->node_count(); ++i) {
      const Complex logdet = std::log((k.node(i).inverse() * h.node(i)).determinant());
      CHECK(std::abs(back.node(i).trace() - logdet) < 1e-10);
    }
  }
}

TEST_CASE("metric_exp rejects non-self-adjoint directions") {
  const Geometry g = make_square_torus(1, 8);
  Mat s = Mat::Zero(2, 2);
  s(0, 1) = 1.0;
  CHECK_THROWS_AS(metric_exp(MetricField::identity(g, 2), EndField::constant(g, s)), ValidationError);
  CHECK(self_adjoint_defect(Mat::Identity(2, 2), s) > 0.1);
}

TEST_CASE("MetricField validates positivity and Hermiticity") {
  const Geometry g = make_square_torus(1, 8);
  CHECK_THROWS_AS(MetricField(EndField::constant(g, diag2(1.0, -1.0))), ValidationError);
  Mat skew = Mat::Identity(2, 2);
  skew(0, 1) = 0.5;
  CHECK_THROWS_AS(MetricField(EndField::constant(g, skew)), ValidationError);
}

TEST_CASE("kernel_apply with the constant and Donaldson kernels") {
  const Geometry g = make_square_torus(1, 8);
  std::mt19937_64 rng(3);
  const MetricField k = random_metric(g, 2, 0.5, rng);
  const EndField s = random_self_adjoint(k, 1.5, rng);
  const EndField v = random_hermitian_field(g, 2, 1.0, 1, rng);
  const EndField same = kernel_apply(k, s, [](Real, Real) { return 1.0; }, v);
  CHECK((same - v).sup_norm() < 1e-12);

  CHECK(donaldson_kernel(0.0, 1.0) == doctest::Approx(std::exp(1.0) - 2.0).epsilon(1e-14));
  CHECK(donaldson_kernel(0.3, 0.3) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(donaldson_kernel(0.0, 1e-9) == doctest::Approx(0.5).epsilon(1e-8));

  const EndField half = kernel_apply(k, EndField(g, 2), donaldson_kernel, v);
  CHECK((half - Complex(0.5) * v).sup_norm() < 1e-12);
}

TEST_CASE("kernel_apply scales eigen-components by kernel(source, target)") {
  const Geometry g = make_square_torus(1, 8);
  const MetricField id = MetricField::identity(g, 2);
  const EndField s = EndField::constant(g, diag2(0.0, 1.0));
  const Mat v = Mat::Ones(2, 2);
  // Entry (row j, col i) maps e_i to e_j.
  const EndField out = kernel_apply(id, s, [](Real x, Real y) { return 10.0 * x + y; }, EndField::constant(g, v));
  const Mat m = out.node(0);
  CHECK(std::abs(m(0, 0) - 0.0) < 1e-14);
  CHECK(std::abs(m(1, 0) - 1.0) < 1e-14);
  CHECK(std::abs(m(0, 1) - 10.0) < 1e-14);
  CHECK(std::abs(m(1, 1) - 11.0) < 1e-14);
}

TEST_CASE("spectral_projector") {
  const Geometry g = make_square_torus(1, 8);
  const MetricField id = MetricField::identity(g, 2);
  const EndField p = spectral_projector(id, EndField::constant(g, diag2(-1.0, 1.0)), 1);
  CHECK(max_abs(p.node(3) - diag2(1.0, 0.0)) < 1e-14);
  CHECK_THROWS_AS(spectral_projector(id, EndField::constant(g, diag2(2.0, 2.0)), 1), ValidationError);

  std::mt19937_64 rng(9);
  const MetricField k = random_metric(g, 3, 0.6, rng);
  Mat d = Mat::Zero(3, 3);
  d(0, 0) = -2.0;
  d(1, 1) = 0.5;
  d(2, 2) = 3.0;
  EndField u(g, 3);
  for (Eigen::Index i = 0; i < g->node_count(); ++i) {
    const HermitianRoots r = hermitian_roots(k.node(i));
    u.set_node(i, r.inv_sqrt * d * r.sqrt);
  }
  const EndField q = spectral_projector(k, u, 2);
  CHECK((q * q - q).sup_norm() < 1e-12);
  CHECK((k.field() * q - adjoint(q) * k.field()).sup_norm() < 1e-12);
  CHECK(std::abs(q.trace().mean() - 2.0) < 1e-12);
}

TEST_CASE("pointwise eigenvalues ascend") {
  const Geometry g = make_square_torus(1, 8);
  std::mt19937_64 rng(2);
  const MetricField k = random_metric(g, 2, 0.5, rng);
  const EndField s = random_self_adjoint(k, 2.0, rng);
  const Eigen::MatrixXd ev = pointwise_eigenvalues(k, s);
  CHECK(ev.rows() == 2);
  CHECK((ev.row(1) - ev.row(0)).minCoeff() >= 0.0);
  for (Eigen::Index i = 0; i < g->node_count(); ++i)
    CHECK(std::abs(ev.col(i).sum() - s.node(i).trace().real()) < 1e-12);
}
