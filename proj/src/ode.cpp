#include "confstat/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace confstat {

namespace {

// Dormand-Prince RK5(4)7M tableau (1980 JCoAM 6 19).
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = 35.0 / 384.0 - 5179.0 / 57600.0, e3 = 500.0 / 1113.0 - 7571.0 / 16695.0,
                 e4 = 125.0 / 192.0 - 393.0 / 640.0, e5 = -2187.0 / 6784.0 + 92097.0 / 339200.0,
                 e6 = 11.0 / 84.0 - 187.0 / 2100.0, e7 = -1.0 / 40.0;

}  // namespace

std::vector<double> DenseSolution::eval(double s) const {
  std::vector<double> out(dim);
  eval_into(s, out);
  return out;
}

void DenseSolution::eval_into(double s, std::span<double> out) const {
  if (t.size() < 2) {
    for (std::size_t i = 0; i < dim; ++i) out[i] = y[0][i];
    return;
  }
  bool increasing = t.back() > t.front();
  // locate bracketing interval, clamping to the integration range
  std::size_t lo = 0, hi = t.size() - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    bool left = increasing ? (s < t[mid]) : (s > t[mid]);
    if (left)
      hi = mid;
    else
      lo = mid;
  }
  double h = t[lo + 1] - t[lo];
  double th = (s - t[lo]) / h;
  th = std::clamp(th, 0.0, 1.0);
  const auto& y0 = y[lo];
  const auto& y1 = y[lo + 1];
  const auto& f0 = f[lo];
  const auto& f1 = f[lo + 1];
  double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
  double h10 = th * (1 - th) * (1 - th);
  double h01 = th * th * (3 - 2 * th);
  double h11 = th * th * (th - 1);
  for (std::size_t i = 0; i < dim; ++i)
    out[i] = h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i];
}

DenseSolution integrate_ode(const OdeRhs& rhs, std::span<const double> y0, double t0, double t1,
                            const OdeOptions& opt, const StepObserver& observer) {
  const std::size_t n = y0.size();
  const double dir = (t1 >= t0) ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  if (span == 0.0) throw SolverError("integrate_ode: empty integration interval");

  DenseSolution sol;
  sol.dim = n;

  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y5(n), err(n);

  double t = t0;
  rhs(t, y, k1);

  auto push_node = [&](double tt, const std::vector<double>& yy, const std::vector<double>& ff) {
    sol.t.push_back(tt);
    sol.y.push_back(yy);
    sol.f.push_back(ff);
  };
  push_node(t, y, k1);

  // initial step from the usual ratio-of-norms heuristic
  double d0 = 0, d1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double sc = opt.atol + opt.rtol * std::abs(y[i]);
    d0 += (y[i] / sc) * (y[i] / sc);
    d1 += (k1[i] / sc) * (k1[i] / sc);
  }
  double h = (d1 > 0 && d0 > 0) ? 0.01 * std::sqrt(d0 / d1) : 1e-6 * span;
  h = std::min(h, span);

  int steps = 0;
  while (dir * (t1 - t) > 0) {
    if (++steps > opt.max_steps) throw SolverError("integrate_ode: maximum step count exceeded");
    h = std::min(h, std::abs(t1 - t));
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0))
      throw SolverError("integrate_ode: step size underflow");
    double hs = dir * h;

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
    rhs(t + c2 * hs, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * hs, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * hs, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * hs, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(t + hs, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      y5[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(t + hs, y5, k7);

    double errnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      errnorm += (err[i] / sc) * (err[i] / sc);
    }
    errnorm = std::sqrt(errnorm / double(n));

    if (!std::isfinite(errnorm)) {
      h *= 0.25;
      continue;
    }
    if (errnorm <= 1.0) {
      t += hs;
      y.swap(y5);
      k1.swap(k7);  // FSAL
      push_node(t, y, k1);
      if (observer) observer(t, y);
      double fac = (errnorm > 0) ? 0.9 * std::pow(errnorm, -0.2) : 5.0;
      h *= std::clamp(fac, 0.2, 5.0);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(errnorm, -0.2));
    }
  }
  return sol;
}

}  // namespace confstat
