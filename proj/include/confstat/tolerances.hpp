#pragma once

#include <map>
#include <string>

#include "confstat/errors.hpp"

namespace confstat {

// Every threshold the toolkit applies, in one place. All values can be
// overridden from the CLI / config file; verdicts always echo the values
// actually used.
struct Tolerances {
  double geom = 1e-8;               // Christoffel / curvature identity residuals
  double linalg = 1e-10;            // 4x4 inversion consistency
  double degenerate = 1e-12;        // |det g| floor
  double norm = 1e-8;               // observer normalization |g(V,V)+1|
  double null_drift = 1e-8;         // |g(K,K)| drift budget per ray (relative)
  double ode_rel = 1e-10;           // integrator relative tolerance
  double ode_abs = 1e-12;           // integrator absolute tolerance
  double quad = 1e-10;              // quadrature refinement target
  double path = 1e-7;               // path-independence budget for ln f
  double phi = 1e-7;                // conformal-factor cross-check budget
  double redshift = 1e-6;           // r-value consistency budget
  double shoot = 1e-8;              // two-point solver miss target
  double stationarity = 1e-6;       // shear / drho certification threshold (scaled)
  double conformal_residual = 1e-6; // conformal-equation residual threshold (scaled)
  double parallel = 1e-8;           // gradient-parallel-to-V test (relative)
  double theta_floor = 1e-8;        // |Theta| > 0 test for the causality branch

  void set(const std::string& key, double v);
  std::map<std::string, double> as_map() const;
};

}  // namespace confstat
