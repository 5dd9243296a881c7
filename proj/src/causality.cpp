#include "confstat/causality.hpp"

#include <cmath>
#include <limits>

namespace confstat {

const char* to_string(CausalityScan::Verdict v) {
  switch (v) {
    case CausalityScan::Verdict::stably_causal_by_prop_cvfgrad:
      return "stably_causal_by_prop_cvfgrad";
    case CausalityScan::Verdict::stably_causal_by_prop_cvfcausal:
      return "stably_causal_by_prop_cvfcausal";
    default:
      return "criteria_not_met";
  }
}

double grad_lnf_identity_residual(const KinematicsSample& sample) {
  Vec4d grad = raise_index(sample.g_inv, sample.rho);
  double norm2 = pair(sample.rho, grad);
  Vec4d v = raise_index(sample.g_inv, sample.u);
  double grad_on_v = contract(sample.g, grad, v);
  double r1 = std::abs(norm2 - (sample.accel_norm2 - sample.theta * sample.theta / 9.0));
  double r2 = std::abs(grad_on_v - sample.theta / 3.0);
  return std::max(r1, r2);
}

CausalityScan causality_scan(const MetricModel& model, const ConformalCandidate& candidate,
                             const Box& region, const GridSpec& grid, const Tolerances& tol,
                             int workers) {
  (void)candidate;  // certification is the caller's precondition; all fields are local
  auto events = grid_events(region, grid);
  const int n = int(events.size());

  CausalityScan scan;
  scan.records.resize(n);
  scan.threshold_parallel = tol.parallel;
  scan.threshold_theta = tol.theta_floor;

  parallel_for_index(n, workers, [&](int i) {
    KinematicsSample s = kinematics_at(model, events[i], tol);
    CausalityRecord r;
    r.point = events[i];
    r.theta = s.theta;
    r.accel_norm2 = s.accel_norm2;
    Vec4d grad = raise_index(s.g_inv, s.rho);
    r.grad_lnf_norm2 = pair(s.rho, grad);
    r.margin = s.theta * s.theta / 9.0 - s.accel_norm2;
    Vec4d v = raise_index(s.g_inv, s.u);
    r.grad_on_v = contract(s.g, grad, v);

    // screen component of grad ln f: the part not parallel to V
    Vec4d w{};
    for (int a = 0; a < 4; ++a) w[a] = grad[a] + r.grad_on_v * v[a];
    double wnorm = std::sqrt(std::abs(contract(s.g, w, w)));
    double gnorm = std::sqrt(std::abs(r.grad_lnf_norm2));
    double gsize = std::max(gnorm, max_abs(grad));
    r.parallel_residual = (gsize > 1e-14) ? wnorm / gsize : 0.0;

    r.identity_residual = grad_lnf_identity_residual(s);
    scan.records[i] = r;
  });

  scan.min_margin = std::numeric_limits<double>::infinity();
  bool any_pos_theta = false, any_neg_theta = false;
  scan.theta_nowhere_zero = true;
  scan.gradient_nowhere_zero = true;
  bool parallel_everywhere = true;
  bool margin_positive = true;
  for (const auto& r : scan.records) {
    scan.min_margin = std::min(scan.min_margin, r.margin);
    scan.max_identity_residual = std::max(scan.max_identity_residual, r.identity_residual);
    scan.max_parallel_residual = std::max(scan.max_parallel_residual, r.parallel_residual);
    if (r.theta > tol.theta_floor) any_pos_theta = true;
    if (r.theta < -tol.theta_floor) any_neg_theta = true;
    if (std::abs(r.theta) <= tol.theta_floor) scan.theta_nowhere_zero = false;
    double gsize = std::sqrt(std::abs(r.grad_lnf_norm2));
    if (std::max(gsize, std::abs(r.grad_on_v)) <= 1e-10) scan.gradient_nowhere_zero = false;
    if (r.parallel_residual > tol.parallel) parallel_everywhere = false;
    if (!(r.margin > 0.0)) margin_positive = false;
  }
  scan.theta_sign_change = any_pos_theta && any_neg_theta;

  // past-pointing sign selection: +ln f when Theta > 0, -ln f when Theta < 0;
  // g(grad of that time function, V) must be positive, and equals |Theta|/3.
  scan.past_pointing_ok = true;
  for (const auto& r : scan.records) {
    if (std::abs(r.theta) <= tol.theta_floor) continue;
    double signed_grad_on_v = (r.theta > 0.0 ? 1.0 : -1.0) * r.grad_on_v;
    if (!(signed_grad_on_v > 0.0)) scan.past_pointing_ok = false;
  }

  if (parallel_everywhere && scan.gradient_nowhere_zero) {
    scan.verdict = CausalityScan::Verdict::stably_causal_by_prop_cvfgrad;
  } else if (scan.theta_nowhere_zero && !scan.theta_sign_change && margin_positive &&
             scan.past_pointing_ok) {
    scan.verdict = CausalityScan::Verdict::stably_causal_by_prop_cvfcausal;
  } else {
    scan.verdict = CausalityScan::Verdict::criteria_not_met;
  }
  return scan;
}

}  // namespace confstat
