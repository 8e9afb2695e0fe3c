#include "nhym/checks.hpp"

#include <chrono>
#include <random>

#include "nhym/experiment.hpp"
#include "nhym/functionals.hpp"
#include "nhym/presets.hpp"
#include "nhym/random_fields.hpp"

namespace nhym {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

Real seconds_since(Clock::time_point t0) {
  return std::chrono::duration<Real>(Clock::now() - t0).count();
}

CheckResult named(std::string name, Real tolerance) {
  CheckResult r;
  r.name = std::move(name);
  r.tolerance = tolerance;
  return r;
}

CheckResult finish(CheckResult r, Clock::time_point t0) {
  r.passed = std::isfinite(r.value) && r.value < r.tolerance;
  r.seconds = seconds_since(t0);
  return r;
}

// Random K-self-adjoint direction s = K^{-1} X with X Hermitian.
EndField random_direction(const MetricField& k, Real amplitude, std::mt19937_64& rng) {
  const EndField x = random_hermitian_field(k.geometry(), k.rank(), amplitude, 1, rng);
  return k.inverse() * x;
}

}  // namespace

json to_json(const CheckResult& r) {
  json j = {{"name", r.name},
            {"value", r.value},
            {"tolerance", r.tolerance},
            {"passed", r.passed},
            {"seconds", r.seconds}};
  if (!r.details.is_null()) j["details"] = r.details;
  return j;
}

CheckResult calibration_check(int n, int size, Real dc_sign) {
  const auto t0 = Clock::now();
  const Geometry g = make_square_torus(n, size);
  const int axes = 2 * n;
  // A fixed superposition of plane waves covering every axis and mixed modes.
  std::vector<std::vector<int>> waves;
  for (int a = 0; a < axes; ++a) {
    std::vector<int> k(axes, 0);
    k[a] = 1 + a % 3;
    waves.push_back(k);
  }
  waves.push_back(std::vector<int>(axes, 1));
  std::vector<int> mixed(axes);
  for (int a = 0; a < axes; ++a) mixed[a] = (a % 2 ? -3 : 2);
  waves.push_back(mixed);

  ScalarField f(g), exact(g);
  Real scale = 0.0;
  for (std::size_t w = 0; w < waves.size(); ++w) {
    Real k2 = 0.0;
    for (int a = 0; a < axes; ++a) {
      const Real ka = 2.0 * kPi * waves[w][a] / g->periods()[a];
      k2 += ka * ka;
    }
    scale = std::max(scale, k2);
    const Complex c = std::polar(1.0, 0.7 * static_cast<Real>(w));
    // Separable per-axis phase tables.
    std::vector<Eigen::VectorXcd> table(axes);
    for (int a = 0; a < axes; ++a) {
      const int len = g->sizes()[a];
      table[a].resize(len);
      for (int m = 0; m < len; ++m)
        table[a][m] = std::polar(1.0, 2.0 * kPi * waves[w][a] * m / static_cast<Real>(len));
    }
    for (Eigen::Index i = 0; i < g->node_count(); ++i) {
      Complex e = c;
      Eigen::Index rest = i;
      for (int a = 0; a < axes; ++a) {
        const int len = g->sizes()[a];
        e *= table[a][rest % len];
        rest /= len;
      }
      f[i] += e;
      exact[i] -= k2 * e;
    }
  }
  const ScalarField composite = composite_laplacian(f, dc_sign);
  CheckResult r;
  r.name = "calibration n=" + std::to_string(n) + " N=" + std::to_string(size) +
           (dc_sign < 0 ? " (flipped d^c)" : "");
  r.tolerance = 1e-10;
  const Real vs_exact = (composite - exact).sup_norm() / (1.0 + scale);
  const Real vs_spectral = (composite - laplacian(f)).sup_norm() / (1.0 + scale);
  r.value = std::max(vs_exact, vs_spectral);
  r.details = {{"vs_plane_wave", vs_exact}, {"vs_spectral_laplacian", vs_spectral}, {"waves", waves.size()}};
  return finish(r, t0);
}

CheckResult identity_check(const std::string& preset_name, int n, int size, int metrics,
                           std::uint64_t seed, Real amplitude, Real tolerance) {
  const auto t0 = Clock::now();
  const Geometry g = make_square_torus(n, size);
  const Connection conn = preset(preset_name, nullptr, g);
  std::mt19937_64 rng(seed);
  CheckResult r;
  r.name = "identities " + preset_name + " n=" + std::to_string(n) + " N=" + std::to_string(size);
  r.tolerance = tolerance;
  json worst = json::object();
  for (int m = 0; m < metrics; ++m) {
    const MetricField h = random_metric(g, conn.rank(), amplitude, rng);
    const MetricField k = random_metric(g, conn.rank(), amplitude, rng);
    const IdentityReport rep = check_identities(conn, h, seed + m, &k);
    for (const auto& res : rep.residuals) {
      r.value = std::max(r.value, res.value);
      worst[res.name] = std::max(worst.value(res.name, 0.0), res.value);
    }
  }
  r.details = {{"metrics", metrics}, {"amplitude", amplitude}, {"worst", worst}};
  return finish(r, t0);
}

std::vector<CheckResult> functional_checks(std::uint64_t seed, int triples) {
  const Geometry g = make_square_torus(1, 32);
  const Connection conn = preset("nonnormal_simple", nullptr, g);
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;

  auto t0 = Clock::now();
  CheckResult path = named("donaldson closed vs 64-step path", 1e-6);
  for (int t = 0; t < triples; ++t) {
    const MetricField k = random_metric(g, 2, 0.4, rng);
    const MetricField l = random_metric(g, 2, 0.4, rng);
    const Real closed = donaldson_closed(conn, k, l);
    const Real by_path = donaldson_path(conn, k, l, 64);
    path.value = std::max(path.value, std::abs(closed - by_path) / (1.0 + std::abs(closed)));
  }
  out.push_back(finish(path, t0));

  t0 = Clock::now();
  CheckResult cocycle = named("donaldson cocycle", 1e-6);
  for (int t = 0; t < triples; ++t) {
    const MetricField k = random_metric(g, 2, 0.4, rng);
    const MetricField j = random_metric(g, 2, 0.4, rng);
    const MetricField l = random_metric(g, 2, 0.4, rng);
    const Real direct = donaldson_closed(conn, k, l);
    const Real via = donaldson_closed(conn, k, j) + donaldson_closed(conn, j, l);
    cocycle.value = std::max(cocycle.value, std::abs(via - direct) / (1.0 + std::abs(direct)));
  }
  out.push_back(finish(cocycle, t0));

  // d/de M(K, H e^{e v}) at e = 0 equals -integral tr(Phi(H) v).
  t0 = Clock::now();
  CheckResult variation = named("donaldson first variation", 1e-5);
  for (int t = 0; t < triples; ++t) {
    const MetricField k = random_metric(g, 2, 0.4, rng);
    const MetricField h = random_metric(g, 2, 0.4, rng);
    const EndField v = random_direction(h, 0.5, rng);
    const Real eps = 1e-4;
    const Real plus = donaldson_closed(conn, k, metric_exp(h, Complex(eps) * v));
    const Real minus = donaldson_closed(conn, k, metric_exp(h, Complex(-eps) * v));
    const Real fd = (plus - minus) / (2.0 * eps);
    const Real predicted = -integrate((phi(conn, h) * v).trace()).real();
    variation.value = std::max(variation.value, std::abs(fd - predicted) / (1.0 + std::abs(predicted)));
  }
  out.push_back(finish(variation, t0));
  return out;
}

json SuiteReport::to_json() const {
  json results_json = json::array();
  for (const auto& r : results) results_json.push_back(nhym::to_json(r));
  return {{"passed", passed},
          {"convention_ledger_checksum", convention_ledger_checksum()},
          {"results", results_json}};
}

SuiteReport check_suite(const SuiteOptions& opts) {
  SuiteReport rep;
  rep.results.push_back(calibration_check(1, 32, opts.dc_sign));
  rep.results.push_back(calibration_check(2, 32, opts.dc_sign));
  rep.results.push_back(identity_check("nilpotent", 1, 32, opts.metrics, opts.seed));
  rep.results.push_back(identity_check("nonnormal_simple", 1, 32, opts.metrics, opts.seed + 1000));
  rep.results.push_back(
      identity_check("nonflat_n2", 2, opts.n2_size, opts.metrics, opts.seed + 2000, opts.n2_amplitude));
  for (auto& r : functional_checks(opts.seed + 3000)) rep.results.push_back(std::move(r));
  for (const auto& r : rep.results) rep.passed = rep.passed && r.passed;
  return rep;
}

}  // namespace nhym
