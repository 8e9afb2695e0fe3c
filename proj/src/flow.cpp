#include "nhym/flow.hpp"

#include <algorithm>
#include <cmath>

#include "pointwise.hpp"

namespace nhym {

void FlowParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("invalid flow parameter: ") + what);
  };
  require(dt_safety > 0.0, "dt_safety must be positive");
  require(t_max > 0.0, "t_max must be positive");
  require(tolerance > 0.0 && tolerance < 1.0, "tolerance must lie in (0, 1)");
  require(blowup_threshold > 1.0, "blowup_threshold must exceed 1");
  require(record_stride > 0, "record_stride must be positive");
  require(!dt || *dt > 0.0, "dt must be positive");
  require(doubling_after > 0, "doubling_after must be positive");
  require(monitor_tolerance > 0.0, "monitor_tolerance must be positive");
}

std::string to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Converged: return "converged";
    case FlowStatus::Blowup: return "blowup";
    case FlowStatus::MaxTime: return "maxtime";
  }
  return "unknown";
}

ScalarField phi_norm(const FlowState& s) {
  return detail::reduce_nodes(
      [](const auto& p, const auto& h, const auto& hi) -> Complex {
        return std::sqrt(std::max<Real>(0.0, detail::inner(h, hi, p, p).real()));
      },
      s.phi, s.dec.h, s.dec.h_inv);
}

FlowState make_state(const Connection& conn, const MetricField& h, const MetricField& k, Real t) {
  FlowState s;
  s.t = t;
  s.h = h;
  s.k = k;
  s.dec = decompose(conn, h, 1e-10, false);
  s.phi = phi(s.dec);
  if (!s.phi.all_finite()) throw IntegrationError("non-finite Phi at t = " + std::to_string(t));
  s.sup_phi = phi_norm(s).sup_norm();
  return s;
}

MetricField normalize_initial(const Connection& conn, const MetricField& h0, Real* residual) {
  if (!conn.certificate()) throw ValidationError("normalize_initial requires an NHYM certificate");
  const int r = conn.rank();
  MetricField h = h0;
  ScalarField tr = phi(conn, h).trace();
  Real res = tr.sup_norm();
  const Real floor = 1e-12 * (1.0 + res);
  for (int iter = 0; iter < 30 && res > floor; ++iter) {
    ScalarField rhs = Complex(-1.0 / (2.0 * r)) * tr;
    const Complex mean = rhs.mean();
    if (std::abs(mean) > 1e-6 * (1.0 + rhs.sup_norm()))
      throw ValidationError("tr Phi has nonzero mean; the connection is not NHYM on this grid");
    rhs -= ScalarField::constant(rhs.geometry(), mean);
    const ScalarField u = poisson_solve(rhs);
    ScalarField w(h.geometry());
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = std::exp(2.0 * u[i].real());
    MetricField next(w * h.field());
    const ScalarField next_tr = phi(conn, next).trace();
    const Real next_res = next_tr.sup_norm();
    if (next_res > 0.5 * res) {
      if (next_res < res) {
        h = std::move(next);
        res = next_res;
      }
      break;
    }
    h = std::move(next);
    tr = next_tr;
    res = next_res;
  }
  if (residual) *residual = res;
  if (res > 1e-8)
    throw ValidationError("normalize_initial: sup |tr Phi| = " + std::to_string(res) +
                          " exceeds 1e-8");
  return h;
}

FlowState step(const Connection& conn, const FlowState& state, Real dt) {
  if (!(dt > 0.0)) throw ValidationError("step requires dt > 0");
  // The discrete Phi is H-self-adjoint only up to aliasing error; step with
  // its H-self-adjoint part so the update stays exactly positive.
  const EndField sym = state.phi + state.dec.h_inv * adjoint(state.phi) * state.dec.h;
  const EndField velocity = Complex(0.5 * dt) * sym;
  const MetricField h = metric_exp(state.h, velocity);
  if (!h.field().all_finite()) throw IntegrationError("non-finite metric at t = " + std::to_string(state.t));
  FlowState next = make_state(conn, h, state.k, state.t + dt);
  next.dt_used = dt;
  next.steps = state.steps + 1;
  next.halvings = state.halvings;
  return next;
}

Real default_timestep(const TorusGeometry& g, Real dt_safety) {
  const Real h = g.min_spacing();
  return dt_safety * h * h / (4.0 * g.complex_dim());
}

FlowRow make_row(const Connection& conn, const FlowState& state, bool with_functionals) {
  FlowRow row;
  row.t = state.t;
  row.dt = state.dt_used;
  row.sup_phi = state.sup_phi;
  const ScalarField pn = phi_norm(state);
  ScalarField pn2(pn.geometry());
  for (Eigen::Index i = 0; i < pn.size(); ++i) pn2[i] = pn[i] * pn[i];
  row.l2_phi = std::sqrt(std::max<Real>(0.0, integrate(pn2).real()));
  if (with_functionals) {
    row.energy = energy(state.dec);
    row.donaldson = donaldson_closed(conn, state.k, state.h);
  }
  row.sigma0 = sigma_field(state.k, state.h).sup_norm();
  const EndField s = metric_log(state.k, state.h);
  const ScalarField sn = k_norm(state.k, s);
  row.s_sup = sn.sup_norm();
  row.s_l1 = integrate(sn).real();
  row.det_res = s.trace().sup_norm();
  return row;
}

FlowReport run(const Connection& conn, const MetricField& h0, const FlowParams& params,
               const FlowObserver& observer) {
  params.validate();
  if (!conn.certificate()) throw ValidationError("run requires an NHYM certificate");
  FlowReport report;
  MetricField start = h0;
  if (params.normalize) start = normalize_initial(conn, h0, &report.summary.normalization_residual);

  const Real dt_base = params.dt ? *params.dt : default_timestep(conn.grid(), params.dt_safety);
  Real dt = dt_base;
  FlowState cur = make_state(conn, start, start);
  FlowState prev = cur;

  auto record = [&](bool flag) {
    FlowRow row = make_row(conn, cur, params.functionals);
    row.phi_monotone_flag = flag;
    report.rows.push_back(row);
    if (observer) observer(prev, cur, row);
    return row;
  };

  const FlowRow first = record(false);
  bool flag_pending = false;
  int clean = 0;
  if (cur.sup_phi < params.tolerance) {
    report.status = FlowStatus::Converged;
  } else if (first.s_sup > params.blowup_threshold) {
    report.status = FlowStatus::Blowup;
  } else {
    const Real t_end = params.t_max * (1.0 - 1e-14);
    while (true) {
      const Real h = std::min(dt, params.t_max - cur.t);
      FlowState next = step(conn, cur, h);
      const Real increase = next.sup_phi - cur.sup_phi;
      report.summary.max_phi_increase =
          std::max(report.summary.max_phi_increase, increase / (1.0 + cur.sup_phi));
      if (increase > params.monitor_tolerance * (1.0 + cur.sup_phi)) {
        flag_pending = true;
        ++report.summary.monitor_trips;
        clean = 0;
        if (params.adaptive) {
          dt *= 0.5;
          ++next.halvings;
        }
      } else if (params.adaptive && ++clean >= params.doubling_after && dt < dt_base) {
        dt = std::min(2.0 * dt, dt_base);
        clean = 0;
      }
      prev = std::move(cur);
      cur = std::move(next);

      const bool converged = cur.sup_phi < params.tolerance;
      const bool out_of_time = cur.t >= t_end;
      if (converged || out_of_time || cur.steps % params.record_stride == 0) {
        const FlowRow row = record(flag_pending);
        flag_pending = false;
        if (converged) {
          report.status = FlowStatus::Converged;
          break;
        }
        if (row.s_sup > params.blowup_threshold) {
          report.status = FlowStatus::Blowup;
          break;
        }
        if (out_of_time) {
          report.status = FlowStatus::MaxTime;
          break;
        }
      }
    }
  }
  report.summary.steps = cur.steps;
  report.summary.halvings = cur.halvings;
  report.final_state = std::move(cur);
  return report;
}

}  // namespace nhym
