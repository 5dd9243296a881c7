#include "confstat/cli.hpp"

#include <cmath>
#include <sstream>

#include "confstat/causality.hpp"

namespace confstat {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json verdict_json(const StationarityVerdict& v) {
  return {{"verdict", to_string(v.verdict)},
          {"shear_sup", v.shear_sup},
          {"drho_sup", v.drho_sup},
          {"conformal_residual_sup", v.conformal_residual_sup},
          {"shear_sup_scaled", v.shear_sup_scaled},
          {"drho_sup_scaled", v.drho_sup_scaled},
          {"conformal_residual_sup_scaled", v.conformal_residual_sup_scaled},
          {"threshold", v.threshold},
          {"candidate_built", v.candidate_built},
          {"anchor", v.anchor},
          {"grid_points", v.grid_points}};
}

void kinematics_table(AnalysisReport& rep, const MetricModel& model, const Box& region,
                      const GridSpec& grid, const Tolerances& tol, int workers) {
  auto events = grid_events(region, grid);
  rep.csv_header = {"t",        "x",         "y",          "z",          "theta",
                    "shear",    "rotation",  "accel2",     "drho",       "res_decomposition",
                    "res_perp", "res_trace", "res_lie",    "res_norm"};
  rep.csv_rows.resize(events.size());
  parallel_for_index(int(events.size()), workers, [&](int i) {
    KinematicsSample s = kinematics_at(model, events[i], tol);
    double perp = std::max({s.residuals.perp_shear, s.residuals.perp_rotation,
                            s.residuals.perp_projector, s.residuals.accel_orthogonality});
    rep.csv_rows[i] = {events[i][0],          events[i][1],
                       events[i][2],          events[i][3],
                       s.theta,               s.shear_norm,
                       s.rotation_norm,       s.accel_norm2,
                       s.drho_norm,           s.residuals.decomposition,
                       perp,                  s.residuals.trace_projector,
                       s.residuals.lie_metric, s.residuals.normalization};
  });
}

}  // namespace

AnalysisReport cmd_analyze(const RunConfig& config) {
  MetricModel model = instantiate(config.model_family, config.params, config.congruence);
  Box region = region_or_domain(config, model);
  int workers = resolve_workers(config);

  StationarityVerdict verdict =
      stationarity_scan(model, region, config.grid, config.tol, workers);

  AnalysisReport rep;
  rep.doc = report_envelope("analyze", config_to_json(config), config.tol.as_map());
  rep.doc["stationarity"] = verdict_json(verdict);

  if (verdict.candidate_built) {
    ConformalCandidate cand(model, verdict.anchor, config.tol);
    json pot;
    pot["anchor"] = verdict.anchor;
    pot["ln_f_at_corners"] = {cand.ln_f(region.lo), cand.ln_f(region.hi)};
    pot["phi_from_theta_at_anchor"] = cand.phi_from_theta(verdict.anchor);
    pot["phi_from_df_at_anchor"] = cand.phi_from_df(verdict.anchor);
    rep.doc["potential"] = pot;
  }

  kinematics_table(rep, model, region, config.grid, config.tol, workers);

  std::ostringstream os;
  os << "analyze " << config.model_family << " (" << config.congruence << ")\n"
     << "  verdict: " << to_string(verdict.verdict) << "\n"
     << "  shear_sup = " << fmt(verdict.shear_sup) << ", drho_sup = " << fmt(verdict.drho_sup)
     << ", conformal_residual_sup = " << fmt(verdict.conformal_residual_sup) << "\n"
     << "  threshold = " << fmt(verdict.threshold) << " (scaled), grid points = "
     << verdict.grid_points << "\n";
  rep.summary = os.str();
  return rep;
}

AnalysisReport cmd_trace(const RunConfig& config) {
  MetricModel model = instantiate(config.model_family, config.params, config.congruence);
  Box region = region_or_domain(config, model);
  int workers = resolve_workers(config);

  AnalysisReport rep;
  rep.doc = report_envelope("trace", config_to_json(config), config.tol.as_map());

  LightSignal signal;
  json trace_info;
  if (config.trace.from && config.trace.to) {
    ObserverWorldline target(model, *config.trace.to, -1e-6, config.trace.window, config.tol);
    ConnectionResult conn =
        connect_observers(model, *config.trace.from, target, ShootDirection::future, config.tol);
    signal = conn.signal;
    trace_info["mode"] = "pair";
    trace_info["arrival_tau"] = conn.arrival_tau;
    trace_info["miss"] = conn.miss;
    trace_info["iterations"] = conn.iterations;
  } else {
    Vec4d k_guess{0.0, (*config.trace.k0)[0], (*config.trace.k0)[1], (*config.trace.k0)[2]};
    signal = integrate_null_geodesic(model, *config.trace.x0, k_guess, config.trace.span,
                                     config.tol);
    trace_info["mode"] = "ray";
  }

  // attach a redshift potential only when the scan region certifies
  StationarityVerdict verdict =
      stationarity_scan(model, region, config.grid, config.tol, workers);
  rep.doc["stationarity"] = verdict_json(verdict);

  std::optional<ConformalCandidate> cand;
  if (verdict.verdict == StationarityVerdict::Result::conformally_stationary)
    cand.emplace(model, verdict.anchor, config.tol);

  RedshiftRecord rs = redshift(model, signal, cand ? &*cand : nullptr, config.tol);
  trace_info["redshift"] = {{"r_integral", rs.r_integral},
                            {"r_endpoint", rs.r_endpoint},
                            {"z", rs.z},
                            {"has_potential", rs.has_potential}};
  if (rs.has_potential) {
    trace_info["redshift"]["r_potential"] = rs.r_potential;
    trace_info["redshift"]["consistency"] = rs.consistency;
    trace_info["conformal_frequency_drift"] = conformal_frequency_drift(model, signal, *cand);
  }
  trace_info["max_null_drift"] = signal.max_null_drift();
  trace_info["max_hamiltonian_drift"] = signal.max_hamiltonian_drift();
  trace_info["endpoints"] = {signal.x.front(), signal.x.back()};
  rep.doc["trace"] = trace_info;

  rep.csv_header = {"s",  "t",  "x",  "y",  "z",        "k_t",        "k_x",
                    "k_y", "k_z", "null_norm", "hamiltonian", "frequency"};
  for (std::size_t i = 0; i < signal.s.size(); ++i)
    rep.csv_rows.push_back({signal.s[i], signal.x[i][0], signal.x[i][1], signal.x[i][2],
                            signal.x[i][3], signal.k[i][0], signal.k[i][1], signal.k[i][2],
                            signal.k[i][3], signal.null_norm[i], signal.hamiltonian[i],
                            signal.frequency[i]});

  std::ostringstream os;
  os << "trace " << config.model_family << ": " << trace_info["mode"].get<std::string>()
     << " mode\n"
     << "  z = " << fmt(rs.z) << ", r_integral = " << fmt(rs.r_integral);
  if (rs.has_potential)
    os << ", r_potential = " << fmt(rs.r_potential) << " (|diff| = " << fmt(rs.consistency)
       << ")";
  os << "\n  null drift = " << fmt(signal.max_null_drift())
     << ", hamiltonian drift = " << fmt(signal.max_hamiltonian_drift()) << "\n";
  rep.summary = os.str();
  return rep;
}

AnalysisReport cmd_parallax(const RunConfig& config) {
  MetricModel model = instantiate(config.model_family, config.params, config.congruence);

  ParallaxProbe probe;
  probe.receiver_seed = config.parallax.receiver;
  probe.source1_seed = config.parallax.source1;
  probe.source2_seed = config.parallax.source2;
  probe.window = config.parallax.window;
  probe.samples = config.parallax.samples;
  probe.lookback = config.parallax.lookback;

  ParallaxReport pr = parallax_verdict(model, probe, config.tol);

  AnalysisReport rep;
  rep.doc = report_envelope("parallax", config_to_json(config), config.tol.as_map());
  rep.doc["parallax"] = {{"angle_drift", pr.angle_drift},
                         {"max_parallax_residual", pr.max_parallax_residual},
                         {"max_conserved_drift", pr.max_conserved_drift},
                         {"v_min", pr.v_min},
                         {"samples", int(pr.rows.size())}};

  rep.csv_header = {"tau", "cos_angle", "parallax_residual", "conserved_drift", "v_min"};
  for (const auto& row : pr.rows)
    rep.csv_rows.push_back(
        {row.tau, row.cos_angle, row.parallax_residual, row.conserved_drift, row.v_min});

  std::ostringstream os;
  os << "parallax " << config.model_family << ": angle drift = " << fmt(pr.angle_drift)
     << ", max residual = " << fmt(pr.max_parallax_residual) << ", v_min = " << fmt(pr.v_min)
     << "\n";
  rep.summary = os.str();
  return rep;
}

AnalysisReport cmd_causality(const RunConfig& config) {
  MetricModel model = instantiate(config.model_family, config.params, config.congruence);
  Box region = region_or_domain(config, model);
  int workers = resolve_workers(config);

  StationarityVerdict verdict =
      stationarity_scan(model, region, config.grid, config.tol, workers);
  if (verdict.verdict != StationarityVerdict::Result::conformally_stationary)
    throw GeometryError(std::string("causality scan requires a certified candidate; "
                                    "stationarity verdict was ") +
                        to_string(verdict.verdict));
  ConformalCandidate cand(model, verdict.anchor, config.tol);

  CausalityScan scan = causality_scan(model, cand, region, config.grid, config.tol, workers);

  AnalysisReport rep;
  rep.doc = report_envelope("causality", config_to_json(config), config.tol.as_map());
  rep.doc["stationarity"] = verdict_json(verdict);
  rep.doc["causality"] = {{"verdict", to_string(scan.verdict)},
                          {"min_margin", scan.min_margin},
                          {"max_identity_residual", scan.max_identity_residual},
                          {"max_parallel_residual", scan.max_parallel_residual},
                          {"theta_sign_change", scan.theta_sign_change},
                          {"theta_nowhere_zero", scan.theta_nowhere_zero},
                          {"gradient_nowhere_zero", scan.gradient_nowhere_zero},
                          {"past_pointing_ok", scan.past_pointing_ok}};

  rep.csv_header = {"t", "x",      "y",          "z",        "theta",
                    "accel2", "grad_lnf_norm2", "margin", "identity_residual"};
  for (const auto& r : scan.records)
    rep.csv_rows.push_back({r.point[0], r.point[1], r.point[2], r.point[3], r.theta,
                            r.accel_norm2, r.grad_lnf_norm2, r.margin, r.identity_residual});

  std::ostringstream os;
  os << "causality " << config.model_family << ": " << to_string(scan.verdict) << "\n"
     << "  min margin = " << fmt(scan.min_margin)
     << ", max identity residual = " << fmt(scan.max_identity_residual) << "\n";
  if (scan.verdict == CausalityScan::Verdict::criteria_not_met)
    os << "  note: the criteria are sufficient only; this verdict makes no claim of "
          "acausality\n";
  rep.summary = os.str();
  return rep;
}

AnalysisReport cmd_potential(const RunConfig& config) {
  MetricModel model = instantiate(config.model_family, config.params, config.congruence);
  Box region = region_or_domain(config, model);
  int workers = resolve_workers(config);

  StationarityVerdict verdict =
      stationarity_scan(model, region, config.grid, config.tol, workers);
  if (verdict.verdict != StationarityVerdict::Result::conformally_stationary)
    throw GeometryError(std::string("potential reconstruction requires d rho certified small; "
                                    "stationarity verdict was ") +
                        to_string(verdict.verdict));

  double lnf = reconstruct_ln_f(model, config.potential.anchor, config.potential.target,
                                config.tol);

  AnalysisReport rep;
  rep.doc = report_envelope("potential", config_to_json(config), config.tol.as_map());
  rep.doc["stationarity"] = verdict_json(verdict);
  rep.doc["potential"] = {{"anchor", config.potential.anchor},
                          {"target", config.potential.target},
                          {"ln_f", lnf},
                          {"f", std::exp(lnf)}};

  std::ostringstream os;
  os << "potential " << config.model_family << ": ln f(target) = " << fmt(lnf)
     << " (gauge ln f(anchor) = 0)\n";
  rep.summary = os.str();
  return rep;
}

AnalysisReport run_command(const RunConfig& config) {
  validate_config(config);
  if (config.command == "analyze") return cmd_analyze(config);
  if (config.command == "trace") return cmd_trace(config);
  if (config.command == "parallax") return cmd_parallax(config);
  if (config.command == "causality") return cmd_causality(config);
  if (config.command == "potential") return cmd_potential(config);
  throw ConfigError("unknown command '" + config.command + "'");
}

}  // namespace confstat
