#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "confstat/conformal.hpp"
#include "confstat/null_transport.hpp"

namespace confstat {

// One batch run: model selection, scan region and grid, tolerance overrides,
// and the per-command specs. CLI flags are overrides of config keys; the
// JSON layout is published in schemas/config.schema.json.
struct RunConfig {
  std::string command = "analyze";
  std::string model_family = "minkowski_static";
  std::map<std::string, double> params;
  std::string congruence = "default";
  std::optional<Box> region;  // default: the model's declared chart domain
  GridSpec grid;
  Tolerances tol;
  int workers = 0;  // 0 = resolve from CONFSTAT_WORKERS, else 1
  std::string out_base;

  struct TraceSpec {
    std::optional<Vec4d> x0;
    std::optional<std::array<double, 3>> k0;
    double span = 1.0;
    std::optional<Vec4d> from;
    std::optional<Vec4d> to;
    double window = 3.0;
  } trace;

  struct PotentialSpec {
    bool set = false;
    Vec4d anchor{};
    Vec4d target{};
  } potential;

  struct ParallaxSpec {
    bool set = false;
    Vec4d receiver{};
    Vec4d source1{};
    Vec4d source2{};
    double window = 1.0;
    int samples = 5;
    double lookback = 3.0;
  } parallax;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);

// Structural validation matching the published schema; throws ConfigError.
void validate_config(const RunConfig& c);

// Worker count: explicit config value, else CONFSTAT_WORKERS, else 1.
int resolve_workers(const RunConfig& c);

Box region_or_domain(const RunConfig& c, const MetricModel& model);

}  // namespace confstat
