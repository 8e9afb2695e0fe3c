#include "nhym/presets.hpp"

#include <cmath>

namespace nhym {
namespace {

using nlohmann::json;

json cplx(Real re, Real im) { return json::array({re, im}); }

Mat sigma_plus() {
  Mat m = Mat::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

Mat sigma_minus() { return sigma_plus().transpose(); }

json merged(const PresetInfo& info, const json& params) {
  json out = info.defaults;
  if (params.is_null()) return out;
  if (!params.is_object()) throw ValidationError("preset '" + info.name + "': params must be an object");
  for (const auto& [key, value] : params.items()) {
    if (!out.contains(key))
      throw ValidationError("preset '" + info.name + "': unknown parameter '" + key + "'");
    out[key] = value;
  }
  return out;
}

const PresetInfo& lookup(const std::string& name) {
  for (const auto& p : preset_catalog())
    if (p.name == name) return p;
  throw ValidationError("unknown preset '" + name + "' (see `presets list`)");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

Real eps_scale(const Mat& b) { return 1e-10 * (1.0 + b.norm()); }

// B dz_1 with every other component zero.
Connection constant_dz1(const Geometry& geom, const Mat& b, const std::string& name) {
  std::vector<Mat> dz(geom->complex_dim(), Mat::Zero(b.rows(), b.cols()));
  dz[0] = b;
  return Connection::constant(geom, static_cast<int>(b.rows()), dz, {}, name);
}

Real real_scalar(const json& j, const std::string& what) {
  require(j.is_number(), what + " must be a number");
  return j.get<Real>();
}

// f = a sin(2 pi k0 x0 / L0) sin(2 pi k1 x1 / L1) and its axis derivatives.
struct SineProduct {
  Complex a;
  int k0, k1;
};

SineProduct sine_product(const json& p) {
  SineProduct s{parse_complex(p.at("amplitude")), 0, 0};
  const json& m = p.at("modes");
  require(m.is_array() && m.size() == 2 && m[0].is_number_integer() && m[1].is_number_integer(),
          "scalar_exact: modes must be two integers");
  s.k0 = m[0].get<int>();
  s.k1 = m[1].get<int>();
  require(s.k0 != 0 && s.k1 != 0, "scalar_exact: modes must be nonzero");
  return s;
}

Connection build(const std::string& name, const json& p, const Geometry& geom);

Connection scalar_exact(const json& p, const Geometry& geom) {
  const SineProduct s = sine_product(p);
  OneForm a(geom, 1);
  const Real w0 = 2.0 * kPi * s.k0 / geom->periods()[0];
  const Real w1 = 2.0 * kPi * s.k1 / geom->periods()[1];
  for (Eigen::Index i = 0; i < geom->node_count(); ++i) {
    const Real x = geom->coordinate(i, 0), y = geom->coordinate(i, 1);
    const Complex fx = s.a * w0 * std::cos(w0 * x) * std::sin(w1 * y);
    const Complex fy = s.a * std::sin(w0 * x) * w1 * std::cos(w1 * y);
    a.dz(0).data()(0, i) = 0.5 * (fx - kI * fy);
    a.dzbar(0).data()(0, i) = 0.5 * (fx + kI * fy);
  }
  return Connection(std::move(a), "scalar_exact");
}

Connection block_sum(const json& p, const Geometry& geom) {
  auto part = [&](const char* key) {
    const json& spec = p.at(key);
    require(spec.is_object() && spec.contains("preset"),
            std::string("block_sum: ") + key + " must be an object with a 'preset' name");
    for (const auto& [k, v] : spec.items()) {
      (void)v;
      require(k == "preset" || k == "params", std::string("block_sum: unknown key '") + k + "'");
    }
    const std::string inner = spec.at("preset").get<std::string>();
    require(inner != "block_sum", "block_sum: nested block sums are not supported");
    return build(inner, merged(lookup(inner), spec.value("params", json())), geom);
  };
  const Connection c1 = part("p1");
  const Connection c2 = part("p2");
  const int r1 = c1.rank(), r2 = c2.rank();
  require(r1 + r2 <= kMaxRank, "block_sum: total rank exceeds " + std::to_string(kMaxRank));
  OneForm a(geom, r1 + r2);
  auto place = [&](EndField& dst, const EndField& src1, const EndField& src2) {
    for (Eigen::Index i = 0; i < geom->node_count(); ++i) {
      Mat m = Mat::Zero(r1 + r2, r1 + r2);
      m.topLeftCorner(r1, r1) = src1.node(i);
      m.bottomRightCorner(r2, r2) = src2.node(i);
      dst.set_node(i, m);
    }
  };
  for (int j = 0; j < geom->complex_dim(); ++j) {
    place(a.dz(j), c1.form().dz(j), c2.form().dz(j));
    place(a.dzbar(j), c1.form().dzbar(j), c2.form().dzbar(j));
  }
  return Connection(std::move(a), "block_sum");
}

Connection build(const std::string& name, const json& p, const Geometry& geom) {
  const int n = geom->complex_dim();
  if (name == "unitary_const") {
    const Mat b = parse_matrix(p.at("B"));
    require((b + b.adjoint()).norm() < eps_scale(b), "unitary_const: B must be anti-Hermitian");
    return constant_dz1(geom, b, name);
  }
  if (name == "normal_const") {
    const Mat b = parse_matrix(p.at("B"));
    require((b * b.adjoint() - b.adjoint() * b).norm() < eps_scale(b) * (1.0 + b.norm()),
            "normal_const: B must be normal");
    return constant_dz1(geom, b, name);
  }
  if (name == "nonnormal_simple") {
    const Mat b = parse_matrix(p.at("B"));
    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(b), false);
    const auto ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      for (Eigen::Index j = i + 1; j < ev.size(); ++j)
        require(std::abs(ev[i] - ev[j]) > 1e-6,
                "nonnormal_simple: B needs distinct eigenvalues (semisimple monodromy)");
    return constant_dz1(geom, b, name);
  }
  if (name == "nilpotent") {
    const Mat nmat = parse_matrix(p.at("N"));
    Mat power = nmat;
    for (int k = 1; k < nmat.rows(); ++k) power = power * nmat;
    require(nmat.norm() > 0.0 && power.norm() < eps_scale(nmat), "nilpotent: N must be nonzero nilpotent");
    return constant_dz1(geom, nmat, name);
  }
  if (name == "scalar_exact") return scalar_exact(p, geom);
  if (name == "scalar_character") {
    Mat c(1, 1), cbar(1, 1);
    c(0, 0) = parse_complex(p.at("c"));
    cbar(0, 0) = parse_complex(p.at("cbar"));
    std::vector<Mat> dz(n, Mat::Zero(1, 1)), dzbar(n, Mat::Zero(1, 1));
    dz[0] = c;
    dzbar[0] = cbar;
    return Connection::constant(geom, 1, dz, dzbar, name);
  }
  if (name == "block_sum") return block_sum(p, geom);
  if (name == "nonflat_n2") {
    require(n == 2, "nonflat_n2 needs complex dimension 2");
    const Real s = real_scalar(p.at("scale"), "nonflat_n2: scale");
    require(s != 0.0, "nonflat_n2: scale must be nonzero");
    const Mat zero = Mat::Zero(2, 2);
    return Connection::constant(geom, 2, {Complex(s) * sigma_plus(), zero},
                                {zero, Complex(s) * sigma_minus()}, name);
  }
  throw ValidationError("unknown preset '" + name + "'");
}

}  // namespace

const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> catalog = {
      {"unitary_const", "A = B dz_1 with B anti-Hermitian; Phi(Id) = 0", 1, 2,
       {{"B", json::array({json::array({cplx(0, 1), 1.0}), json::array({-1.0, cplx(0, 2)})})}}},
      {"normal_const", "A = B dz_1 with B normal; Phi(Id) = 0", 1, 2,
       {{"B", json::array({json::array({cplx(1, 1), 0.0}), json::array({0.0, 2.0})})}}},
      {"nonnormal_simple", "A = B dz_1 with B non-normal, distinct eigenvalues", 1, 2,
       {{"B", json::array({json::array({1.0, 1.0}), json::array({0.0, 2.0})})}}},
      {"nilpotent", "A = N dz_1 with N nilpotent; not semisimple", 1, 2,
       {{"N", json::array({json::array({0.0, 1.0}), json::array({0.0, 0.0})})}}},
      {"scalar_exact", "rank 1, A = df with f = a sin(2 pi k0 x0/L0) sin(2 pi k1 x1/L1)", 1, 2,
       {{"amplitude", 1.0}, {"modes", json::array({1, 1})}}},
      {"scalar_character", "rank 1, A = c dz_1 + cbar dzbar_1; harmonic metrics are constant", 1, 2,
       {{"c", cplx(1.0, 0.5)}, {"cbar", cplx(0.3, 0.0)}}},
      {"block_sum", "block-diagonal sum of two presets", 1, 2,
       {{"p1", {{"preset", "scalar_character"}, {"params", {{"c", cplx(0.5, 0.0)}, {"cbar", 0.0}}}}},
        {"p2", {{"preset", "nonnormal_simple"}}}}},
      {"nonflat_n2", "A = s(sigma_+ dz_1 + sigma_- dzbar_2); curved, lambda = 0", 2, 2,
       {{"scale", 1.0}}},
  };
  return catalog;
}

Connection preset(const std::string& name, const json& params, const Geometry& geom) {
  const PresetInfo& info = lookup(name);
  const int n = geom->complex_dim();
  require(n >= info.min_dim && n <= info.max_dim,
          "preset '" + name + "' does not support complex dimension " + std::to_string(n));
  json p;
  try {
    p = merged(info, params);
  } catch (const json::exception& e) {
    throw ValidationError("preset '" + name + "': " + e.what());
  }
  Connection conn;
  try {
    conn = build(name, p, geom);
  } catch (const json::exception& e) {
    throw ValidationError("preset '" + name + "': " + e.what());
  }
  validate_nhym(conn);
  return conn;
}

MetricField exact_harmonic_metric(const std::string& name, const json& params, const Geometry& geom) {
  const json p = merged(lookup(name), params);
  if (name == "scalar_character") return MetricField::identity(geom, 1);
  require(name == "scalar_exact", "no closed-form harmonic metric for preset '" + name + "'");
  const SineProduct s = sine_product(p);
  const Real w0 = 2.0 * kPi * s.k0 / geom->periods()[0];
  const Real w1 = 2.0 * kPi * s.k1 / geom->periods()[1];
  ScalarField g(geom);
  for (Eigen::Index i = 0; i < geom->node_count(); ++i)
    g[i] = 2.0 * s.a.real() * std::sin(w0 * geom->coordinate(i, 0)) * std::sin(w1 * geom->coordinate(i, 1));
  const Complex mean = g.mean();
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = std::exp((g[i] - mean).real());
  return MetricField(EndField::scalar(g, 1));
}

Complex parse_complex(const json& j) {
  if (j.is_number()) return Complex(j.get<Real>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Complex(j[0].get<Real>(), j[1].get<Real>());
  throw ValidationError("expected a number or a [re, im] pair, got " + j.dump());
}

Mat parse_matrix(const json& j) {
  require(j.is_array() && !j.empty(), "matrix must be a non-empty array of rows");
  const auto r = static_cast<Eigen::Index>(j.size());
  require(r <= kMaxRank, "matrix size exceeds the supported rank " + std::to_string(kMaxRank));
  Mat m(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const json& row = j[i];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == r, "matrix must be square");
    for (Eigen::Index k = 0; k < r; ++k) m(i, k) = parse_complex(row[k]);
  }
  return m;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(cplx(m(i, k).real(), m(i, k).imag()));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nhym
