#pragma once

#include "confstat/conformal.hpp"

namespace confstat {

// Per-event record for the stable-causality criteria. grad ln f is obtained
// by raising rho (d ln f = rho on a certified model), which makes every field
// here gauge invariant.
struct CausalityRecord {
  Vec4d point{};
  double theta = 0.0;
  double accel_norm2 = 0.0;      // g(nabla_V V, nabla_V V)
  double grad_lnf_norm2 = 0.0;   // g(grad ln f, grad ln f)
  double margin = 0.0;           // theta^2/9 - accel_norm2
  double grad_on_v = 0.0;        // g(grad ln f, V); equals theta/3 identically
  double parallel_residual = 0.0;  // screen part of grad ln f relative to its size
  double identity_residual = 0.0;  // worse of the two gradient identities
};

struct CausalityScan {
  enum class Verdict {
    stably_causal_by_prop_cvfgrad,
    stably_causal_by_prop_cvfcausal,
    criteria_not_met
  };
  Verdict verdict = Verdict::criteria_not_met;
  std::vector<CausalityRecord> records;
  double min_margin = 0.0;
  double max_identity_residual = 0.0;
  double max_parallel_residual = 0.0;
  bool theta_sign_change = false;
  bool theta_nowhere_zero = false;
  bool gradient_nowhere_zero = false;
  bool past_pointing_ok = false;
  double threshold_parallel = 0.0;
  double threshold_theta = 0.0;
};

const char* to_string(CausalityScan::Verdict v);

// Evaluate the sufficient (never necessary) stable-causality criteria over a
// region. Requires a certified candidate; the verdict criteria_not_met makes
// no claim of acausality.
CausalityScan causality_scan(const MetricModel& model, const ConformalCandidate& candidate,
                             const Box& region, const GridSpec& grid, const Tolerances& tol = {},
                             int workers = 1);

// Residuals of g(grad ln f, grad ln f) = accel^2 - theta^2/9 and
// g(grad ln f, V) = theta/3 at one event; returns the worse of the two.
double grad_lnf_identity_residual(const KinematicsSample& sample);

}  // namespace confstat
