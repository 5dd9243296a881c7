#pragma once

#include <cmath>

#include "confstat/errors.hpp"
#include "confstat/linalg.hpp"

namespace confstat {

namespace detail {

// 8-point Gauss-Legendre rule on [0,1].
inline constexpr double gl8_x[8] = {
    0.01985507175123188415821957, 0.10166676129318663020422303, 0.23723379504183550709113047,
    0.40828267875217509753026193, 0.59171732124782490246973807, 0.76276620495816449290886953,
    0.89833323870681336979577697, 0.98014492824876811584178043};
inline constexpr double gl8_w[8] = {
    0.05061426814518812957626567, 0.11119051722668723527217800, 0.15685332293894364366898110,
    0.18134189168918099148257522, 0.18134189168918099148257522, 0.15685332293894364366898110,
    0.11119051722668723527217800, 0.05061426814518812957626567};

}  // namespace detail

// Composite 8-point Gauss-Legendre over [0,1] with a fixed panel count. The
// integrand takes a plain double parameter but may return any scalar,
// including duals, so reconstructed potentials stay differentiable.
template <class S, class F>
S composite_gl(F&& q, int panels) {
  S total = S(0.0);
  double w = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    double left = p * w;
    for (int i = 0; i < 8; ++i) {
      double ti = left + w * detail::gl8_x[i];
      total = total + (w * detail::gl8_w[i]) * q(ti);
    }
  }
  return total;
}

struct QuadratureResult {
  double value = 0.0;
  int panels = 0;
};

// Panel doubling until two successive refinements agree to tol.
template <class F>
QuadratureResult adaptive_gl(F&& q, double tol, int max_panels = 16384) {
  int panels = 2;
  double prev = composite_gl<double>(q, panels);
  while (panels < max_panels) {
    panels *= 2;
    double cur = composite_gl<double>(q, panels);
    if (std::abs(cur - prev) < tol * std::max(1.0, std::abs(cur)))
      return {cur, panels};
    prev = cur;
  }
  throw SolverError("quadrature failed to converge", std::abs(prev));
}

}  // namespace confstat
