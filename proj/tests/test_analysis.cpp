#include <cmath>
#include <random>

#include "doctest.h"
#include "nhym/analysis.hpp"
#include "nhym/presets.hpp"
#include "nhym/random_fields.hpp"

using namespace nhym;

namespace {

Mat diag2(Complex a, Complex b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Mat e1(int rank) {
  Mat v = Mat::Zero(rank, 1);
  v(0, 0) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("splitting of the nilpotent bundle at the standard metric") {
  const Geometry g = make_square_torus(1, 16);
  const Connection conn = preset("nilpotent", nullptr, g);
  const MetricField id = MetricField::identity(g, 2);
  const SplittingReport rep = splitting_check(conn, id, orthogonal_projector(id, e1(2)));
  CHECK(rep.beta_l2 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(rep.block_residual) < 1e-12);
  CHECK(rep.invariance < 1e-12);
}

TEST_CASE("block sums split with vanishing second fundamental form") {
  const Geometry g = make_square_torus(1, 16);
  const Connection conn = preset("block_sum", nullptr, g);
  const MetricField id = MetricField::identity(g, 3);
  const SplittingReport rep = splitting_check(conn, id, orthogonal_projector(id, e1(3)));
  CHECK(rep.beta_l2 < 1e-12);
  CHECK(rep.invariance < 1e-12);
  CHECK(std::abs(rep.block_residual) < 1e-12);
}

TEST_CASE("splitting_check rejects non-projectors") {
  const Geometry g = make_square_torus(1, 8);
  const Connection conn = preset("nilpotent", nullptr, g);
  const MetricField id = MetricField::identity(g, 2);
  CHECK_THROWS_AS(splitting_check(conn, id, EndField::constant(g, diag2(2.0, 0.0))), ValidationError);
  Mat skew = diag2(1.0, 0.0);
  skew(0, 1) = 1.0;
  CHECK_THROWS_AS(splitting_check(conn, id, EndField::constant(g, skew)), ValidationError);
}

TEST_CASE("orthogonal_projector is an H-self-adjoint idempotent") {
  const Geometry g = make_square_torus(1, 8);
  std::mt19937_64 rng(12);
  const MetricField h = random_metric(g, 3, 0.7, rng);
  Mat v = Mat::Zero(3, 2);
  v(0, 0) = 1.0;
  v(1, 1) = 1.0;
  v(2, 1) = Complex(0.0, 1.0);
  const EndField p = orthogonal_projector(h, v);
  CHECK((p * p - p).sup_norm() < 1e-12);
  CHECK((h.field() * p - adjoint(p) * h.field()).sup_norm() < 1e-12);
  CHECK(subspace_alignment(MetricField(h), p, v) < 1e-12);
}

TEST_CASE("two-metric identities on random pairs") {
  const Geometry g = make_square_torus(1, 32);
  const Connection conn = preset("nonnormal_simple", nullptr, g);
  std::mt19937_64 rng(19);
  const MetricField h = random_metric(g, 2, 0.5, rng);
  const MetricField k = random_metric(g, 2, 0.5, rng);
  const TwoMetricReport r = two_metric_check(conn, h, k);
  CHECK(r.general_residual < 1e-8);
  CHECK(r.min_norm_terms >= 0.0);
  CHECK(r.log_inequality_slack >= 0.0);
  CHECK(sup_sigma(h, h) < 1e-12);
  CHECK(sup_sigma(h, k) > 0.0);
}

TEST_CASE("blow-up analysis of a constant diagonal log-metric") {
  const Geometry g = make_square_torus(1, 8);
  const Connection conn = preset("nilpotent", nullptr, g);
  const MetricField id = MetricField::identity(g, 2);
  const MetricField h = metric_exp(id, EndField::constant(g, diag2(-3.0, 3.0)));
  const BlowupReport rep = blowup_analysis(conn, id, h);
  CHECK(rep.l1_norm == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(rep.u_l1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(rep.tr_u_integral) < 1e-12);
  REQUIRE(rep.eigen_mean.size() == 2);
  CHECK(rep.eigen_mean[0] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(rep.eigen_std[0] < 1e-12);
  REQUIRE(rep.projectors.size() == 1);
  const ProjectorReport& p = rep.projectors[0];
  CHECK(p.rank == 1);
  CHECK(p.idempotency < 1e-12);
  CHECK(p.invariance < 1e-12);
  CHECK(subspace_alignment(id, p.pi, e1(2)) < 1e-12);
}

TEST_CASE("monitor on a clean step of a normalised flow") {
  const Geometry g = make_square_torus(1, 16);
  const Connection conn = preset("nonnormal_simple", nullptr, g);
  std::mt19937_64 rng(7);
  const MetricField h0 = normalize_initial(conn, random_metric(g, 2, 0.3, rng));
  const FlowState s0 = make_state(conn, h0, h0);
  const Real dt = default_timestep(*g, 0.2);
  FlowState a = s0;
  for (int i = 0; i < 100; ++i) a = step(conn, a, dt);
  const FlowState b = step(conn, a, dt);
  const MonitorRecord rec = monitor(conn, a, b, s0.sup_phi);
  CHECK(rec.flags.empty());
  CHECK(rec.det_res < 1e-9);
  CHECK(rec.sup_phi_delta <= 0.0);
  CHECK(rec.sigma_slack >= 0.0);
  CHECK(rec.phi2_ineq <= MonitorTolerances{}.phi2_heat * rec.phi2_scale);
}

TEST_CASE("Bochner residual needs equally spaced states") {
  const Geometry g = make_square_torus(1, 16);
  const Connection conn = preset("nonnormal_simple", nullptr, g);
  std::mt19937_64 rng(7);
  const MetricField h0 = random_metric(g, 2, 0.3, rng);
  const Real dt = default_timestep(*g, 0.2);
  const FlowState a = make_state(conn, h0, h0);
  const FlowState b = step(conn, a, dt);
  const FlowState c = step(conn, b, 2.0 * dt);
  CHECK_THROWS_AS(bochner_residual(conn, a, b, c), ValidationError);
  const FlowState c2 = step(conn, b, dt);
  const Real r = bochner_residual(conn, a, b, c2);
  CHECK(std::isfinite(r));
  CHECK(r < 0.1 * (1.0 + bochner_terms(b.dec).grad2.sup_norm()));
}
