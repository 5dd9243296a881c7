#include "confstat/config.hpp"

#include <cstdlib>

#include "confstat/version.hpp"

namespace confstat {

namespace {

using nlohmann::json;

Vec4d read_vec4(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4)
    throw ConfigError(what + " must be an array of 4 numbers");
  Vec4d v{};
  for (int a = 0; a < 4; ++a) {
    if (!j[a].is_number()) throw ConfigError(what + " must be numeric");
    v[a] = j[a].get<double>();
  }
  return v;
}

std::array<double, 3> read_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(what + " must be an array of 3 numbers");
  std::array<double, 3> v{};
  for (int a = 0; a < 3; ++a) v[a] = j[a].get<double>();
  return v;
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config document must be a JSON object");
  if (j.contains("schema_version") && j["schema_version"].get<int>() != kConfigSchemaVersion)
    throw ConfigError("unsupported config schema_version");

  RunConfig c;
  if (j.contains("command")) c.command = j["command"].get<std::string>();

  if (j.contains("model")) {
    const auto& m = j["model"];
    if (!m.is_object()) throw ConfigError("model must be an object");
    if (m.contains("family")) c.model_family = m["family"].get<std::string>();
    if (m.contains("congruence")) c.congruence = m["congruence"].get<std::string>();
    if (m.contains("params")) {
      if (!m["params"].is_object()) throw ConfigError("model.params must be an object");
      for (auto it = m["params"].begin(); it != m["params"].end(); ++it) {
        if (!it.value().is_number()) throw ConfigError("model parameters must be numeric");
        c.params[it.key()] = it.value().get<double>();
      }
    }
  }

  if (j.contains("region")) {
    const auto& r = j["region"];
    if (!r.is_object()) throw ConfigError("region must be an object with axis ranges");
    Box box{};
    for (int a = 0; a < 4; ++a) {
      std::string name = axis_name(a);
      if (!r.contains(name))
        throw ConfigError("region is missing axis '" + name + "'");
      const auto& range = r[name];
      if (!range.is_array() || range.size() != 2)
        throw ConfigError("region." + name + " must be [lo, hi]");
      box.lo[a] = range[0].get<double>();
      box.hi[a] = range[1].get<double>();
      if (!(box.lo[a] < box.hi[a]))
        throw ConfigError("region." + name + " must satisfy lo < hi");
    }
    c.region = box;
  }

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    if (g.is_number_integer()) {
      int n = g.get<int>();
      c.grid.n = {n, n, n, n};
    } else if (g.is_array() && g.size() == 4) {
      for (int a = 0; a < 4; ++a) c.grid.n[a] = g[a].get<int>();
    } else {
      throw ConfigError("grid must be an integer or an array of 4 integers");
    }
  }

  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) throw ConfigError("tolerances must be an object");
    for (auto it = j["tolerances"].begin(); it != j["tolerances"].end(); ++it)
      c.tol.set(it.key(), it.value().get<double>());
  }

  if (j.contains("workers")) c.workers = j["workers"].get<int>();
  if (j.contains("out")) c.out_base = j["out"].get<std::string>();

  if (j.contains("trace")) {
    const auto& t = j["trace"];
    if (t.contains("x0")) c.trace.x0 = read_vec4(t["x0"], "trace.x0");
    if (t.contains("k0")) c.trace.k0 = read_vec3(t["k0"], "trace.k0");
    if (t.contains("span")) c.trace.span = t["span"].get<double>();
    if (t.contains("from")) c.trace.from = read_vec4(t["from"], "trace.from");
    if (t.contains("to")) c.trace.to = read_vec4(t["to"], "trace.to");
    if (t.contains("window")) c.trace.window = t["window"].get<double>();
  }

  if (j.contains("potential")) {
    const auto& p = j["potential"];
    c.potential.set = true;
    c.potential.anchor = read_vec4(p.at("anchor"), "potential.anchor");
    c.potential.target = read_vec4(p.at("target"), "potential.target");
  }

  if (j.contains("parallax")) {
    const auto& p = j["parallax"];
    c.parallax.set = true;
    c.parallax.receiver = read_vec4(p.at("receiver"), "parallax.receiver");
    c.parallax.source1 = read_vec4(p.at("source1"), "parallax.source1");
    c.parallax.source2 = read_vec4(p.at("source2"), "parallax.source2");
    if (p.contains("window")) c.parallax.window = p["window"].get<double>();
    if (p.contains("samples")) c.parallax.samples = p["samples"].get<int>();
    if (p.contains("lookback")) c.parallax.lookback = p["lookback"].get<double>();
  }

  validate_config(c);
  return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["command"] = c.command;
  j["model"] = {{"family", c.model_family},
                {"params", c.params},
                {"congruence", c.congruence}};
  if (c.region) {
    json r;
    for (int a = 0; a < 4; ++a) r[axis_name(a)] = {c.region->lo[a], c.region->hi[a]};
    j["region"] = r;
  }
  j["grid"] = c.grid.n;
  j["tolerances"] = c.tol.as_map();
  j["workers"] = c.workers;
  if (!c.out_base.empty()) j["out"] = c.out_base;

  json t;
  if (c.trace.x0) t["x0"] = *c.trace.x0;
  if (c.trace.k0) t["k0"] = *c.trace.k0;
  t["span"] = c.trace.span;
  if (c.trace.from) t["from"] = *c.trace.from;
  if (c.trace.to) t["to"] = *c.trace.to;
  t["window"] = c.trace.window;
  j["trace"] = t;

  if (c.potential.set)
    j["potential"] = {{"anchor", c.potential.anchor}, {"target", c.potential.target}};
  if (c.parallax.set)
    j["parallax"] = {{"receiver", c.parallax.receiver}, {"source1", c.parallax.source1},
                     {"source2", c.parallax.source2},   {"window", c.parallax.window},
                     {"samples", c.parallax.samples},   {"lookback", c.parallax.lookback}};
  return j;
}

void validate_config(const RunConfig& c) {
  static const char* commands[] = {"analyze", "trace", "parallax", "causality", "potential"};
  bool ok = false;
  for (const char* cmd : commands)
    if (c.command == cmd) ok = true;
  if (!ok) throw ConfigError("unknown command '" + c.command + "'");

  for (int a = 0; a < 4; ++a)
    if (c.grid.n[a] < 2) throw ConfigError("grid resolution must be >= 2 per axis");
  if (c.workers < 0) throw ConfigError("workers must be >= 1 (or omitted)");
  if (!(c.trace.span > 0.0)) throw ConfigError("trace.span must be positive");
  if (!(c.trace.window > 0.0)) throw ConfigError("trace.window must be positive");
  if (c.parallax.set) {
    if (c.parallax.samples < 2) throw ConfigError("parallax.samples must be >= 2");
    if (!(c.parallax.window > 0.0)) throw ConfigError("parallax.window must be positive");
    if (!(c.parallax.lookback > 0.0)) throw ConfigError("parallax.lookback must be positive");
  }

  if (c.command == "trace") {
    bool ray_mode = c.trace.x0.has_value() && c.trace.k0.has_value();
    bool pair_mode = c.trace.from.has_value() && c.trace.to.has_value();
    if (!ray_mode && !pair_mode)
      throw ConfigError("trace needs either x0+k0 (ray) or from+to (observer pair)");
  }
  if (c.command == "potential" && !c.potential.set)
    throw ConfigError("potential needs anchor and target events");
  if (c.command == "parallax" && !c.parallax.set)
    throw ConfigError("parallax needs receiver, source1 and source2 seeds");
}

int resolve_workers(const RunConfig& c) {
  if (c.workers > 0) return c.workers;
  if (const char* env = std::getenv("CONFSTAT_WORKERS")) {
    int w = std::atoi(env);
    if (w >= 1 && w <= 256) return w;
  }
  return 1;
}

Box region_or_domain(const RunConfig& c, const MetricModel& model) {
  return c.region ? *c.region : model.domain();
}

}  // namespace confstat
