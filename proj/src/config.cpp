#include "nhym/config.hpp"

#include <fstream>
#include <set>

#include "nhym/presets.hpp"

namespace nhym {
namespace {

using nlohmann::json;

void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

// Checks that `j` is an object whose keys all belong to `allowed`.
void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where, "must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
  }
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) fail(where + "." + key, "must be a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) fail(where + "." + key, "must be an integer");
    if constexpr (std::is_unsigned_v<T>)
      if (v.is_number_integer() && v.get<long long>() < 0) fail(where + "." + key, "must be non-negative");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) fail(where + "." + key, "must be a number");
  } else {
    if (!v.is_string()) fail(where + "." + key, "must be a string");
  }
  return v.get<T>();
}

std::string resolve(const std::filesystem::path& base, const std::string& file) {
  if (file.empty()) return file;
  const std::filesystem::path p(file);
  return p.is_absolute() ? file : (base / p).lexically_normal().string();
}

GeometryConfig parse_geometry(const json& j) {
  const std::string where = "geometry";
  require_keys(j, where, {"n", "sizes", "periods"});
  GeometryConfig g;
  g.n = get<int>(j, "n", where, 1);
  if (g.n != 1 && g.n != 2) fail(where + ".n", "must be 1 or 2");
  const int axes = 2 * g.n;
  g.sizes.assign(axes, 32);
  g.periods.assign(axes, 1.0);
  if (j.contains("sizes")) {
    const json& s = j.at("sizes");
    if (s.is_number_integer()) {
      g.sizes.assign(axes, s.get<int>());
    } else if (s.is_array() && static_cast<int>(s.size()) == axes) {
      for (int a = 0; a < axes; ++a) {
        if (!s[a].is_number_integer()) fail(where + ".sizes", "entries must be integers");
        g.sizes[a] = s[a].get<int>();
      }
    } else {
      fail(where + ".sizes", "must be an integer or an array of 2n integers");
    }
  }
  for (int s : g.sizes)
    if (s < 8 || s % 2 != 0) fail(where + ".sizes", "each size must be even and at least 8");
  if (j.contains("periods")) {
    const json& p = j.at("periods");
    if (p.is_number()) {
      g.periods.assign(axes, p.get<Real>());
    } else if (p.is_array() && static_cast<int>(p.size()) == axes) {
      for (int a = 0; a < axes; ++a) {
        if (!p[a].is_number()) fail(where + ".periods", "entries must be numbers");
        g.periods[a] = p[a].get<Real>();
      }
    } else {
      fail(where + ".periods", "must be a number or an array of 2n numbers");
    }
  }
  for (Real p : g.periods)
    if (!(p > 0.0)) fail(where + ".periods", "must be positive");
  return g;
}

ConnectionConfig parse_connection(const json& j, const std::filesystem::path& base) {
  const std::string where = "connection";
  require_keys(j, where, {"preset", "params", "file"});
  ConnectionConfig c;
  c.preset = get<std::string>(j, "preset", where, "");
  c.file = resolve(base, get<std::string>(j, "file", where, ""));
  if (c.preset.empty() == c.file.empty()) fail(where, "exactly one of 'preset' and 'file' is required");
  if (j.contains("params")) {
    if (c.preset.empty()) fail(where + ".params", "only allowed with 'preset'");
    c.params = j.at("params");
    if (!c.params.is_object()) fail(where + ".params", "must be an object");
  }
  if (!c.preset.empty()) {
    bool known = false;
    for (const auto& p : preset_catalog()) known = known || p.name == c.preset;
    if (!known) fail(where + ".preset", "unknown preset '" + c.preset + "'");
  }
  return c;
}

InitialMetricConfig parse_initial(const json& j, const std::filesystem::path& base) {
  const std::string where = "initial_metric";
  require_keys(j, where, {"kind", "file", "seed", "amplitude", "max_mode"});
  InitialMetricConfig m;
  m.kind = get<std::string>(j, "kind", where, "identity");
  if (m.kind != "identity" && m.kind != "inline" && m.kind != "conformal" && m.kind != "random")
    fail(where + ".kind", "must be identity, inline, conformal or random");
  m.file = resolve(base, get<std::string>(j, "file", where, ""));
  if ((m.kind == "inline") != !m.file.empty()) fail(where + ".file", "required for kind 'inline' only");
  m.seed = get<std::uint64_t>(j, "seed", where, 1);
  m.amplitude = get<Real>(j, "amplitude", where, 0.3);
  m.max_mode = get<int>(j, "max_mode", where, 1);
  if (!(m.amplitude >= 0.0 && m.amplitude < 1.0)) fail(where + ".amplitude", "must lie in [0, 1)");
  if (m.max_mode < 1) fail(where + ".max_mode", "must be at least 1");
  return m;
}

FlowParams parse_flow(const json& j) {
  const std::string where = "flow";
  require_keys(j, where,
               {"dt_safety", "t_max", "tolerance", "blowup_threshold", "dt", "normalize", "adaptive",
                "doubling_after", "monitor_tolerance", "functionals"});
  FlowParams f;
  f.dt_safety = get<Real>(j, "dt_safety", where, f.dt_safety);
  f.t_max = get<Real>(j, "t_max", where, f.t_max);
  f.tolerance = get<Real>(j, "tolerance", where, f.tolerance);
  f.blowup_threshold = get<Real>(j, "blowup_threshold", where, f.blowup_threshold);
  if (j.contains("dt")) f.dt = get<Real>(j, "dt", where, 0.0);
  f.normalize = get<bool>(j, "normalize", where, f.normalize);
  f.adaptive = get<bool>(j, "adaptive", where, f.adaptive);
  f.doubling_after = get<int>(j, "doubling_after", where, f.doubling_after);
  f.monitor_tolerance = get<Real>(j, "monitor_tolerance", where, f.monitor_tolerance);
  f.functionals = get<bool>(j, "functionals", where, f.functionals);
  return f;
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  require_keys(doc, "config",
               {"name", "geometry", "connection", "initial_metric", "flow", "output", "analysis", "seed"});
  ExperimentConfig c;
  c.source = doc;
  c.name = get<std::string>(doc, "name", "config", c.name);
  c.seed = get<std::uint64_t>(doc, "seed", "config", c.seed);
  if (doc.contains("geometry")) c.geometry = parse_geometry(doc.at("geometry"));
  else c.geometry = parse_geometry(json::object());
  if (!doc.contains("connection")) fail("config", "missing required block 'connection'");
  c.connection = parse_connection(doc.at("connection"), base_dir);
  if (doc.contains("initial_metric")) c.initial_metric = parse_initial(doc.at("initial_metric"), base_dir);
  if (doc.contains("flow")) c.flow = parse_flow(doc.at("flow"));

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    require_keys(o, "output", {"directory", "stride", "snapshot_initial", "snapshot_final", "monitor"});
    c.output.directory = get<std::string>(o, "directory", "output", c.output.directory);
    c.flow.record_stride = get<int>(o, "stride", "output", c.flow.record_stride);
    c.output.snapshot_initial = get<bool>(o, "snapshot_initial", "output", c.output.snapshot_initial);
    c.output.snapshot_final = get<bool>(o, "snapshot_final", "output", c.output.snapshot_final);
    c.output.monitor = get<bool>(o, "monitor", "output", c.output.monitor);
  }
  if (doc.contains("analysis")) {
    const json& a = doc.at("analysis");
    require_keys(a, "analysis", {"blowup", "splitting_vectors", "min_gap"});
    c.analysis.blowup = get<bool>(a, "blowup", "analysis", c.analysis.blowup);
    c.analysis.min_gap = get<Real>(a, "min_gap", "analysis", c.analysis.min_gap);
    if (!(c.analysis.min_gap > 0.0)) fail("analysis.min_gap", "must be positive");
    if (a.contains("splitting_vectors")) {
      // Rows of the JSON array are the spanning vectors.
      const json& v = a.at("splitting_vectors");
      if (!v.is_array() || v.empty() || !v[0].is_array())
        fail("analysis.splitting_vectors", "must be a non-empty array of vectors");
      const auto k = static_cast<Eigen::Index>(v.size());
      const auto r = static_cast<Eigen::Index>(v[0].size());
      Mat cols(r, k);
      try {
        for (Eigen::Index i = 0; i < k; ++i) {
          if (!v[i].is_array() || static_cast<Eigen::Index>(v[i].size()) != r)
            fail("analysis.splitting_vectors", "vectors must have equal length");
          for (Eigen::Index a2 = 0; a2 < r; ++a2) cols(a2, i) = parse_complex(v[i][a2]);
        }
      } catch (const ValidationError& e) {
        fail("analysis.splitting_vectors", e.what());
      }
      c.analysis.splitting_vectors = cols;
    }
  }
  try {
    c.flow.validate();
  } catch (const ValidationError& e) {
    fail("flow", e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(is, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

Geometry build_geometry(const GeometryConfig& g) {
  try {
    return make_torus(g.n, g.sizes, g.periods);
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
}

}  // namespace nhym
