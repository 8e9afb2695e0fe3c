#include "nhym/functionals.hpp"

#include <string>

namespace nhym {
namespace {

Real integrand(const Connection& conn, const MetricField& h, const EndField& direction) {
  return -integrate((phi(conn, h) * direction).trace()).real();
}

Real simpson(const std::vector<Real>& f, Real h) {
  const std::size_t m = f.size() - 1;
  Real acc = f.front() + f.back();
  for (std::size_t i = 1; i < m; ++i) acc += (i % 2 ? 4.0 : 2.0) * f[i];
  return acc * h / 3.0;
}

}  // namespace

Real energy(const Decomposition& d) {
  return 0.5 * integrate(h_norm_squared(d.h, d.h_inv, d.psi)).real();
}

Real energy(const Connection& conn, const MetricField& h) { return energy(decompose(conn, h)); }

Real donaldson_closed(const Connection& conn, const MetricField& k, const MetricField& l) {
  const EndField s = metric_log(k, l);
  const Real linear = integrand(conn, k, s);
  const OneForm ds = apply_D(conn, s);
  const OneForm weighted = kernel_apply(k, s, donaldson_kernel, ds);
  const EndField k_inv = k.inverse();
  ScalarField density(k.geometry());
  for_each_node(density.size(), [&](Eigen::Index i) {
    const Mat km = k.node(i);
    const Mat ki = k_inv.node(i);
    Complex acc = 0.0;
    for (std::size_t c = 0; c < ds.components().size(); ++c)
      acc += h_inner(km, ki, weighted.components()[c].node(i), ds.components()[c].node(i));
    density[i] = 2.0 * acc;
  });
  return linear + integrate(density).real();
}

Real donaldson_path(const Connection& conn, const MetricField& k, const MetricField& l,
                    int steps) {
  if (steps < 8 || steps % 2 != 0)
    throw ValidationError("donaldson_path needs an even step count >= 8, got " +
                          std::to_string(steps));
  const EndField s0 = metric_log(k, l);
  std::vector<Real> f(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    const Real tau = static_cast<Real>(i) / steps;
    const MetricField h = i == 0 ? k : metric_exp(k, Complex(tau) * s0);
    f[i] = integrand(conn, h, s0);
  }
  return simpson(f, 1.0 / steps);
}

Real donaldson_path_via(const Connection& conn, const MetricField& k, const MetricField& j,
                        const MetricField& l, int steps) {
  return donaldson_path(conn, k, j, steps) + donaldson_path(conn, j, l, steps);
}

ScalarField sigma_field(const MetricField& k, const MetricField& h) {
  const EndField k_inv = k.inverse();
  const EndField h_inv = h.inverse();
  ScalarField out(k.geometry());
  const Real r2 = 2.0 * k.rank();
  for_each_node(out.size(), [&](Eigen::Index i) {
    out[i] = (k_inv.node(i) * h.node(i)).trace().real() +
             (h_inv.node(i) * k.node(i)).trace().real() - r2;
  });
  return out;
}

Real sigma(const MetricField& k, const MetricField& h) {
  return integrate(sigma_field(k, h)).real();
}

FunctionalValues evaluate_functionals(const Connection& conn, const MetricField& k,
                                      const MetricField& h) {
  FunctionalValues v;
  v.energy = energy(conn, h);
  v.donaldson = donaldson_closed(conn, k, h);
  v.sigma = sigma(k, h);
  return v;
}

}  // namespace nhym
