#pragma once

#include <functional>
#include <span>
#include <vector>

#include "confstat/errors.hpp"

namespace confstat {

// dy/dt at (t, y); write into dydt (same length as y).
using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

// Called after every accepted step; may throw to abort the integration.
using StepObserver = std::function<void(double t, std::span<const double> y)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  int max_steps = 1000000;
};

// Accepted-step nodes with derivatives, plus cubic Hermite evaluation in
// between. Node times are monotone (increasing or decreasing with the
// direction of integration).
class DenseSolution {
 public:
  std::vector<double> t;
  std::vector<std::vector<double>> y;
  std::vector<std::vector<double>> f;
  std::size_t dim = 0;

  std::vector<double> eval(double s) const;
  void eval_into(double s, std::span<double> out) const;
  std::size_t steps() const { return t.empty() ? 0 : t.size() - 1; }
};

// Adaptive Dormand-Prince 5(4) with FSAL and a standard step controller.
// Conservation drift along the solution is the product's evidence, so the
// default tolerances sit well below every verdict threshold.
DenseSolution integrate_ode(const OdeRhs& rhs, std::span<const double> y0, double t0, double t1,
                            const OdeOptions& opt = {}, const StepObserver& observer = {});

}  // namespace confstat
