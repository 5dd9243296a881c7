#pragma once

#include <optional>

#include "confstat/kinematics.hpp"

namespace confstat {

struct GridSpec {
  std::array<int, 4> n = {5, 5, 5, 5};
  int total() const { return n[0] * n[1] * n[2] * n[3]; }
};

// Candidate conformal vector field xi = f V with f reconstructed by line
// integration of rho from an anchor event (gauge ln f(anchor) = 0). The class
// is defined up to a constant factor; rescaled() moves within the class,
// shifted() deliberately leaves it (negative tests).
class ConformalCandidate {
 public:
  ConformalCandidate(const MetricModel& model, const Vec4d& anchor, Tolerances tol = {});

  double ln_f(const Vec4d& target) const;
  double f(const Vec4d& target) const;
  Vec4d d_ln_f(const Vec4d& target) const;  // differential of the quadrature-defined ln f
  Vec4d df(const Vec4d& target) const;
  double phi_from_df(const Vec4d& target) const;     // 2 df(V)
  double phi_from_theta(const Vec4d& target) const;  // (2/3) f Theta
  TangentVector cvf(const Vec4d& target) const;      // xi = f V

  ConformalCandidate rescaled(double factor) const;
  ConformalCandidate shifted(double offset) const;

  const MetricModel& model() const { return *model_; }
  const Vec4d& anchor() const { return anchor_; }
  double gauge_factor() const { return gauge_factor_; }
  double shift() const { return shift_; }

 private:
  const MetricModel* model_;
  Vec4d anchor_{};
  Tolerances tol_;
  double gauge_factor_ = 1.0;
  double shift_ = 0.0;
};

// ln f(target) - ln f(anchor) along the coordinate straight line; the chart
// boxes are convex, so the segment stays inside the domain whenever its
// endpoints do.
double reconstruct_ln_f(const MetricModel& model, const Vec4d& anchor, const Vec4d& target,
                        const Tolerances& tol = {});

// Two-segment path through a waypoint; with d rho = 0 this must agree with
// the straight line (path-independence check).
double reconstruct_ln_f_via(const MetricModel& model, const Vec4d& anchor, const Vec4d& waypoint,
                            const Vec4d& target, const Tolerances& tol = {});

// Max-abs entry of L_xi g - Phi g with L_xi g = f L_V g + df v g(V,.) built
// from the reconstructed f and its dual-number differential, Phi = (2/3) f Theta.
double conformal_residual(const MetricModel& model, const ConformalCandidate& candidate,
                          const Vec4d& p);

struct StationarityVerdict {
  enum class Result { conformally_stationary, not_stationary, inconclusive };
  Result verdict = Result::inconclusive;
  double shear_sup = 0.0;  // raw invariant sup-norms over the scan
  double drho_sup = 0.0;
  double conformal_residual_sup = 0.0;  // NaN when no candidate was built
  double shear_sup_scaled = 0.0;
  double drho_sup_scaled = 0.0;
  double conformal_residual_sup_scaled = 0.0;
  double threshold = 0.0;
  bool candidate_built = false;
  Vec4d anchor{};
  int grid_points = 0;
};

const char* to_string(StationarityVerdict::Result r);

StationarityVerdict stationarity_scan(const MetricModel& model, const Box& region,
                                      const GridSpec& grid, const Tolerances& tol = {},
                                      int workers = 1);

// f_A/f_B sampled over a grid; a genuine equivalence class has zero spread.
struct RatioStatistics {
  double mean = 0.0;
  double spread = 0.0;  // max - min
};
RatioStatistics equivalence_class_check(const ConformalCandidate& a, const ConformalCandidate& b,
                                        const Box& region, const GridSpec& grid);

// Transport X0, Y0 along the integral curve of xi = f V by conformal Lie
// transport (L_xi X = alpha X, component gauge) and report the worst drift of
// the angle cosine. Throws if either vector turns null along the curve.
double angle_preservation_check(const MetricModel& model, const ConformalCandidate& candidate,
                                const Vec4d& start, double parameter_span, const Vec4d& x0,
                                const Vec4d& y0, int samples = 64);

// Region-wide helper shared by scans: parallel map of an event function over
// the grid of a box.
std::vector<Vec4d> grid_events(const Box& region, const GridSpec& grid);
void parallel_for_index(int count, int workers, const std::function<void(int)>& fn);

}  // namespace confstat
