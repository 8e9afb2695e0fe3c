#include <cmath>
#include <random>

#include "doctest.h"
#include "nhym/flow.hpp"
#include "nhym/presets.hpp"
#include "nhym/random_fields.hpp"

using namespace nhym;

TEST_CASE("default time step heuristic") {
  const Geometry g = make_square_torus(1, 16);
  CHECK(default_timestep(*g, 0.2) == doctest::Approx(0.2 / (16.0 * 16.0) / 4.0));
  const Geometry g2 = make_square_torus(2, 8);
  CHECK(default_timestep(*g2, 0.2) == doctest::Approx(0.2 / 64.0 / 8.0));
}

TEST_CASE("FlowParams validation") {
  FlowParams p;
  CHECK_NOTHROW(p.validate());
  p.dt_safety = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = FlowParams{};
  p.t_max = -1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = FlowParams{};
  p.dt = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("one step from the standard metric is exp(dt Phi)") {
  const Geometry g = make_square_torus(1, 8);
  const Connection conn = preset("nilpotent", nullptr, g);
  const MetricField id = MetricField::identity(g, 2);
  const FlowState s0 = make_state(conn, id, id);
  const Real dt = 1e-3;
  const FlowState s1 = step(conn, s0, dt);
  CHECK(s1.t == doctest::Approx(dt));
  CHECK(std::abs(s1.h.node(3)(0, 0) - std::exp(-2.0 * dt)) < 1e-12);
  CHECK(std::abs(s1.h.node(3)(1, 1) - std::exp(2.0 * dt)) < 1e-12);
  CHECK(std::abs(s1.h.node(3)(0, 1)) < 1e-12);
}

TEST_CASE("normalize_initial removes tr Phi and steps then preserve det") {
  const Geometry g = make_square_torus(1, 16);
  const Connection conn = preset("nonnormal_simple", nullptr, g);
  std::mt19937_64 rng(7);
  const MetricField h0 = random_metric(g, 2, 0.5, rng);
  CHECK(phi(conn, h0).trace().sup_norm() > 1e-3);
  Real res = 1.0;
  const MetricField h = normalize_initial(conn, h0, &res);
  CHECK(res < 1e-8);
  CHECK(phi(conn, h).trace().sup_norm() < 1e-8);

  FlowState s = make_state(conn, h, h);
  const Real dt = default_timestep(*g, 0.2);
  for (int i = 0; i < 20; ++i) s = step(conn, s, dt);
  Real det_res = 0.0;
  for (Eigen::Index i = 0; i < g->node_count(); ++i)
    det_res = std::max(det_res, std::abs(std::log(std::abs((h.node(i).inverse() * s.h.node(i)).determinant()))));
  CHECK(det_res < 1e-9);
}

TEST_CASE("a harmonic start converges immediately") {
  const Geometry g = make_square_torus(1, 8);
  const Connection conn = preset("unitary_const", nullptr, g);
  FlowParams p;
  p.t_max = 1.0;
  const FlowReport rep = run(conn, MetricField::identity(g, 2), p);
  CHECK(rep.status == FlowStatus::Converged);
  CHECK(rep.final_state.t == 0.0);
  CHECK(rep.rows.size() >= 1);
}

TEST_CASE("flow requires a certified connection") {
  const Geometry g = make_square_torus(1, 8);
  Mat b = Mat::Zero(2, 2);
  b(0, 1) = 1.0;
  const Connection raw = Connection::constant(g, 2, {b}, {});
  CHECK_THROWS_AS(run(raw, MetricField::identity(g, 2), FlowParams{}), ValidationError);
}

TEST_CASE("short flow: sup|Phi| decreases and rows are strided") {
  const Geometry g = make_square_torus(1, 16);
  const Connection conn = preset("nonnormal_simple", nullptr, g);
  std::mt19937_64 rng(3);
  FlowParams p;
  p.t_max = 0.05;
  p.record_stride = 20;
  const FlowReport rep = run(conn, random_metric(g, 2, 0.4, rng), p);
  CHECK(rep.status == FlowStatus::MaxTime);
  CHECK(rep.final_state.t == doctest::Approx(0.05));
  REQUIRE(rep.rows.size() > 3);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    CHECK(rep.rows[i].sup_phi <= rep.rows[i - 1].sup_phi * (1.0 + 1e-6));
    CHECK_FALSE(rep.rows[i].phi_monotone_flag);
    CHECK(rep.rows[i].donaldson <= rep.rows[i - 1].donaldson + 1e-12);
  }
  CHECK(rep.summary.monitor_trips == 0);
}

TEST_CASE("blow-up status when sup|s| exceeds the threshold") {
  const Geometry g = make_square_torus(1, 8);
  const Connection conn = preset("nilpotent", nullptr, g);
  FlowParams p;
  p.t_max = 10.0;
  p.blowup_threshold = 1.5;
  p.functionals = false;
  const FlowReport rep = run(conn, MetricField::identity(g, 2), p);
  CHECK(rep.status == FlowStatus::Blowup);
  CHECK(rep.rows.back().s_sup > 1.5);
}

TEST_CASE("scalar_exact flow approaches the closed-form metric") {
  const Geometry g = make_square_torus(1, 16);
  const nlohmann::json params = {{"amplitude", 0.2}};
  const Connection conn = preset("scalar_exact", params, g);
  const MetricField exact = exact_harmonic_metric("scalar_exact", params, g);
  FlowParams p;
  p.tolerance = 1e-8;
  p.t_max = 2.0;
  p.normalize = false;
  p.functionals = false;
  const FlowReport rep = run(conn, MetricField::identity(g, 1), p);
  REQUIRE(rep.status == FlowStatus::Converged);
  Real err = 0.0;
  for (Eigen::Index i = 0; i < g->node_count(); ++i)
    err = std::max(err, std::abs(rep.final_state.h.node(i)(0, 0) / exact.node(i)(0, 0) - 1.0));
  CHECK(err < 1e-7);
}
