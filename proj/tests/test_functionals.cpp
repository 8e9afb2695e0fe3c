#include <cmath>
#include <random>

#include "doctest.h"
#include "nhym/functionals.hpp"
#include "nhym/presets.hpp"
#include "nhym/random_fields.hpp"

using namespace nhym;

namespace {

Mat sigma_plus() {
  Mat m = Mat::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

Mat diag2(Complex a, Complex b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Connection certified(Connection c) {
  validate_nhym(c);
  return c;
}

}  // namespace

TEST_CASE("energy examples") {
  const Geometry g = make_square_torus(1, 8);
  const Mat u = (Mat(2, 2) << Complex(0, 1), 1.0, -1.0, Complex(0, 2)).finished();
  const Connection unitary = Connection::constant(g, 2, {u}, {u});
  CHECK(energy(unitary, MetricField::identity(g, 2)) < 1e-24);

  const Connection nil = Connection::constant(g, 2, {sigma_plus()}, {});
  CHECK(energy(nil, MetricField::identity(g, 2)) == doctest::Approx(0.5).epsilon(1e-13));

  // a = df with f real is unitary for the metric e^{2f}.
  const Geometry g16 = make_square_torus(1, 16);
  const ScalarField f = ScalarField::from_function(g16, [](std::span<const Real> x) {
    return Complex(0.4 * std::sin(2.0 * kPi * x[0]) * std::cos(2.0 * kPi * x[1]));
  });
  OneForm a(g16, 1);
  a.dz(0) = EndField::scalar(derivative(f, 0, Wirtinger::Dz), 1);
  a.dzbar(0) = EndField::scalar(derivative(f, 0, Wirtinger::Dzbar), 1);
  ScalarField e2f(g16);
  for (Eigen::Index i = 0; i < e2f.size(); ++i) e2f[i] = std::exp(2.0 * f[i]);
  const MetricField h(EndField::scalar(e2f, 1));
  CHECK(energy(Connection(a, "exact"), h) < 1e-12);
  CHECK(energy(Connection(a, "exact"), MetricField::identity(g16, 1)) > 1e-2);
}

TEST_CASE("sigma") {
  const Geometry g = make_square_torus(1, 8);
  const MetricField id = MetricField::identity(g, 2);
  const MetricField h(EndField::constant(g, diag2(2.0, 0.5)));
  CHECK(sigma(id, id) == doctest::Approx(0.0));
  CHECK(sigma(id, h) == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(13);
  const MetricField k = random_metric(g, 2, 0.6, rng);
  const MetricField l = random_metric(g, 2, 0.6, rng);
  CHECK(sigma(k, l) == doctest::Approx(sigma(l, k)).epsilon(1e-13));
  CHECK(sigma_field(k, l).data().real().minCoeff() >= 0.0);
}

TEST_CASE("Donaldson functional: trivial values and antisymmetry") {
  const Geometry g = make_square_torus(1, 32);
  const Connection conn = preset("nonnormal_simple", nullptr, g);
  std::mt19937_64 rng(31);
  const MetricField k = random_metric(g, 2, 0.5, rng);
  const MetricField l = random_metric(g, 2, 0.5, rng);
  CHECK(std::abs(donaldson_closed(conn, k, k)) < 1e-14);
  CHECK(std::abs(donaldson_path(conn, k, k, 8)) < 1e-14);
  const Real kl = donaldson_closed(conn, k, l);
  const Real lk = donaldson_closed(conn, l, k);
  CHECK(std::abs(kl + lk) < 1e-6 * (1.0 + std::abs(kl)));
}

TEST_CASE("Donaldson functional: path independence and Simpson order") {
  const Geometry g = make_square_torus(1, 32);
  const Connection conn = preset("nonnormal_simple", nullptr, g);
  std::mt19937_64 rng(44);
  const MetricField k = random_metric(g, 2, 0.8, rng);
  const MetricField j = random_metric(g, 2, 0.8, rng);
  const MetricField l = random_metric(g, 2, 0.8, rng);
  const Real closed = donaldson_closed(conn, k, l);
  CHECK(std::abs(donaldson_path(conn, k, l, 64) - closed) < 1e-6 * (1.0 + std::abs(closed)));
  CHECK(std::abs(donaldson_path_via(conn, k, j, l, 64) - closed) < 1e-6 * (1.0 + std::abs(closed)));

  const Real e8 = std::abs(donaldson_path(conn, k, l, 8) - closed);
  const Real e16 = std::abs(donaldson_path(conn, k, l, 16) - closed);
  CHECK(e8 > 1e-12);
  CHECK(e8 / e16 >= 8.0);
  CHECK_THROWS_AS(donaldson_path(conn, k, l, 6), ValidationError);
}

TEST_CASE("Donaldson functional is non-negative from a harmonic reference") {
  const Geometry g = make_square_torus(1, 16);
  const Connection conn = preset("unitary_const", nullptr, g);
  const MetricField id = MetricField::identity(g, 2);
  std::mt19937_64 rng(6);
  for (int t = 0; t < 3; ++t) CHECK(donaldson_closed(conn, id, random_metric(g, 2, 1.0, rng)) >= 0.0);
}

TEST_CASE("first variation of M matches -integral tr(Phi(K) s0)") {
  const Geometry g = make_square_torus(1, 16);
  const Connection conn = preset("nilpotent", nullptr, g);
  std::mt19937_64 rng(15);
  const MetricField k = random_metric(g, 2, 0.5, rng);
  const EndField s0 = random_self_adjoint(k, 0.7, rng);
  const Real eps = 1e-4;
  const Real fd = (donaldson_closed(conn, k, metric_exp(k, Complex(eps) * s0)) -
                   donaldson_closed(conn, k, metric_exp(k, Complex(-eps) * s0))) /
                  (2.0 * eps);
  const Real predicted = -integrate((phi(conn, k) * s0).trace()).real();
  CHECK(fd == doctest::Approx(predicted).epsilon(1e-6));
}

TEST_CASE("evaluate_functionals bundles the three values") {
  const Geometry g = make_square_torus(1, 16);
  const Connection conn = certified(Connection::constant(g, 2, {sigma_plus()}, {}));
  std::mt19937_64 rng(1);
  const MetricField h = random_metric(g, 2, 0.4, rng);
  const MetricField id = MetricField::identity(g, 2);
  const FunctionalValues v = evaluate_functionals(conn, id, h);
  CHECK(v.energy == doctest::Approx(energy(conn, h)));
  CHECK(v.donaldson == doctest::Approx(donaldson_closed(conn, id, h)));
  CHECK(v.sigma == doctest::Approx(sigma(id, h)));
}
