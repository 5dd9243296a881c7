#include "confstat/null_transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "confstat/quadrature.hpp"

namespace confstat {

namespace {

// Cubic Hermite on (nodes, values, derivatives) arrays with s in [0,1].
Vec4d hermite_eval(const std::vector<double>& s, const std::vector<Vec4d>& val,
                   const std::vector<Vec4d>& der, double q) {
  std::size_t lo = 0, hi = s.size() - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    (q < s[mid] ? hi : lo) = mid;
  }
  double h = s[lo + 1] - s[lo];
  double th = std::clamp((q - s[lo]) / h, 0.0, 1.0);
  double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
  double h10 = th * (1 - th) * (1 - th);
  double h01 = th * th * (3 - 2 * th);
  double h11 = th * th * (th - 1);
  Vec4d out{};
  for (int a = 0; a < 4; ++a)
    out[a] = h00 * val[lo][a] + h * h10 * der[lo][a] + h01 * val[lo + 1][a] +
             h * h11 * der[lo + 1][a];
  return out;
}

double reference_kscale2(const Mat4d& g, const Vec4d& k) {
  double s = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) s += std::abs(g[a][b]) * std::abs(k[a]) * std::abs(k[b]);
  return std::max(s, 1e-300);
}

void geodesic_rhs(const MetricModel& model, double, std::span<const double> y,
                  std::span<double> dy) {
  Vec4d x{y[0], y[1], y[2], y[3]};
  Vec4d k{y[4], y[5], y[6], y[7]};
  auto gamma = detail::christoffel(model, x);
  for (int a = 0; a < 4; ++a) dy[a] = k[a];
  for (int a = 0; a < 4; ++a) {
    double s = 0.0;
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) s += gamma[a][b][c] * k[b] * k[c];
    dy[4 + a] = -s;
  }
}

void solve_linear(std::vector<std::vector<double>>& m, std::vector<double>& rhs,
                  const char* what) {
  const int n = int(rhs.size());
  double scale = 0.0;
  for (auto& row : m)
    for (double v : row) scale = std::max(scale, std::abs(v));
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) < 1e-13 * std::max(scale, 1.0))
      throw SolverError(std::string("singular linear system in ") + what);
    std::swap(m[piv], m[col]);
    std::swap(rhs[piv], rhs[col]);
    for (int r = col + 1; r < n; ++r) {
      double f = m[r][col] / m[col][col];
      for (int c = col; c < n; ++c) m[r][c] -= f * m[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (int col = n - 1; col >= 0; --col) {
    double s = rhs[col];
    for (int c = col + 1; c < n; ++c) s -= m[col][c] * rhs[c];
    rhs[col] = s / m[col][col];
  }
}

}  // namespace


Vec4d LightSignal::x_at(double q) const { return hermite_eval(s, x, k, q); }
Vec4d LightSignal::k_at(double q) const { return hermite_eval(s, k, dk, q); }

double LightSignal::max_null_drift() const {
  double m = 0.0;
  for (double v : null_norm) m = std::max(m, std::abs(v));
  return m / kscale2;
}

double LightSignal::max_hamiltonian_drift() const {
  double m = 0.0;
  for (double v : hamiltonian) m = std::max(m, std::abs(v));
  return m / kscale2;
}

LightSignal LightSignal::reversed() const {
  LightSignal r;
  const std::size_t n = s.size();
  r.s.resize(n);
  r.x.resize(n);
  r.k.resize(n);
  r.dk.resize(n);
  r.null_norm.resize(n);
  r.hamiltonian.resize(n);
  r.frequency.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = n - 1 - i;
    r.s[i] = 1.0 - s[j];
    r.x[i] = x[j];
    r.k[i] = vec_scale(-1.0, k[j]);
    r.dk[i] = dk[j];
    r.null_norm[i] = null_norm[j];
    r.hamiltonian[i] = hamiltonian[j];
    r.frequency[i] = frequency[j];
  }
  r.kscale2 = kscale2;
  return r;
}

Vec4d null_project(const MetricModel& model, const Vec4d& p, const Vec4d& k0_guess, bool future) {
  Mat4d g = model.metric(p);
  Vec4d v = model.observer(p);
  double qa = g[0][0];
  double qb = 0.0, qc = 0.0;
  for (int i = 1; i < 4; ++i) qb += 2.0 * g[0][i] * k0_guess[i];
  for (int i = 1; i < 4; ++i)
    for (int j = 1; j < 4; ++j) qc += g[i][j] * k0_guess[i] * k0_guess[j];
  if (qc <= 0.0)
    throw GeometryError("null_project: spatial part of the initial direction is degenerate");

  double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) throw GeometryError("null_project: no null direction with this spatial part");
  double sq = std::sqrt(disc);
  double r1, r2;
  if (qa == 0.0) {
    r1 = r2 = -qc / qb;
  } else {
    double w = (qb >= 0.0) ? -(qb + sq) / 2.0 : -(qb - sq) / 2.0;
    r1 = w / qa;
    r2 = qc / w;
  }
  for (double root : {r1, r2}) {
    Vec4d k = k0_guess;
    k[0] = root;
    double kv = contract(g, k, v);
    if ((future && kv < 0.0) || (!future && kv > 0.0)) return k;
  }
  throw GeometryError("null_project: no root with the requested time orientation");
}

LightSignal integrate_null_geodesic(const MetricModel& model, const Vec4d& x0,
                                    const Vec4d& k0_guess, double affine_span,
                                    const Tolerances& tol) {
  if (!(affine_span > 0.0)) throw ConfigError("affine span must be positive");
  model.require_inside(x0);
  Vec4d k0 = null_project(model, x0, k0_guess, true);

  Mat4d g0 = model.metric(x0);
  double kscale2 = reference_kscale2(g0, k0);

  std::array<double, 8> y0{x0[0], x0[1], x0[2], x0[3], k0[0], k0[1], k0[2], k0[3]};
  OdeRhs rhs = [&model](double t, std::span<const double> y, std::span<double> dy) {
    geodesic_rhs(model, t, y, dy);
  };
  StepObserver obs = [&](double, std::span<const double> y) {
    Vec4d x{y[0], y[1], y[2], y[3]};
    Vec4d k{y[4], y[5], y[6], y[7]};
    model.require_inside(x, 1e-9);
    double nn = contract(model.metric(x), k, k);
    if (std::abs(nn) > tol.null_drift * kscale2) {
      std::ostringstream os;
      os << "null-norm drift breach: |g(K,K)| = " << std::abs(nn)
         << " exceeds budget " << tol.null_drift * kscale2 << " at x = (" << x[0] << ", " << x[1]
         << ", " << x[2] << ", " << x[3] << ")";
      throw GeometryError(os.str());
    }
  };
  OdeOptions opt;
  opt.rtol = tol.ode_rel;
  opt.atol = tol.ode_abs;
  DenseSolution sol = integrate_ode(rhs, y0, 0.0, affine_span, opt, obs);

  LightSignal sig;
  const std::size_t n = sol.t.size();
  sig.s.resize(n);
  sig.x.resize(n);
  sig.k.resize(n);
  sig.dk.resize(n);
  sig.null_norm.resize(n);
  sig.hamiltonian.resize(n);
  sig.frequency.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sig.s[i] = sol.t[i] / affine_span;
    for (int a = 0; a < 4; ++a) {
      sig.x[i][a] = sol.y[i][a];
      sig.k[i][a] = sol.y[i][4 + a] * affine_span;
      sig.dk[i][a] = sol.f[i][4 + a] * affine_span * affine_span;
    }
    Mat4d g = model.metric(sig.x[i]);
    Vec4d v = model.observer(sig.x[i]);
    sig.null_norm[i] = contract(g, sig.k[i], sig.k[i]);
    Vec4d klow = lower_index(g, sig.k[i]);
    Mat4d ginv = inverse4(g);
    double ham = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) ham += 0.5 * ginv[a][b] * klow[a] * klow[b];
    sig.hamiltonian[i] = ham;
    sig.frequency[i] = std::abs(contract(g, v, sig.k[i]));
  }
  sig.kscale2 = kscale2 * affine_span * affine_span;
  return sig;
}

double conformal_frequency_drift(const MetricModel& model, const LightSignal& signal,
                                 const ConformalCandidate& candidate) {
  double cf0 = 0.0, drift = 0.0;
  for (std::size_t i = 0; i < signal.s.size(); ++i) {
    Mat4d g = model.metric(signal.x[i]);
    Vec4d v = model.observer(signal.x[i]);
    double cf = candidate.f(signal.x[i]) * contract(g, v, signal.k[i]);
    if (i == 0)
      cf0 = cf;
    else
      drift = std::max(drift, std::abs(cf - cf0));
  }
  return drift / std::max(std::abs(cf0), 1e-300);
}

double hamiltonian_check(const MetricModel&, const LightSignal& signal) {
  double m = 0.0;
  for (double h : signal.hamiltonian) m = std::max(m, std::abs(h));
  return m;
}

RedshiftRecord redshift(const MetricModel& model, const LightSignal& signal,
                        const ConformalCandidate* candidate, const Tolerances& tol) {
  RedshiftRecord rec;
  const Vec4d& xe = signal.x.front();
  const Vec4d& xr = signal.x.back();

  double nu_e = contract(model.metric(xe), model.observer(xe), signal.k.front());
  double nu_r = contract(model.metric(xr), model.observer(xr), signal.k.back());
  rec.r_endpoint = std::log(nu_e / nu_r);

  auto integrand = [&](double s) {
    Vec4d x = signal.x_at(s);
    Vec4d k = signal.k_at(s);
    auto core = detail::kin_core(model, x);
    double bkk = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) bkk += core.nabla_v[a][b] * k[a] * k[b];
    return -bkk / contract(core.g, core.V, k);
  };
  rec.r_integral = adaptive_gl(integrand, tol.quad).value;
  rec.z = std::exp(rec.r_integral) - 1.0;

  if (candidate) {
    rec.has_potential = true;
    rec.r_potential = candidate->ln_f(xr) - candidate->ln_f(xe);
    rec.consistency = std::abs(rec.r_integral - rec.r_potential);
  } else {
    rec.r_potential = std::numeric_limits<double>::quiet_NaN();
    rec.consistency = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

ObserverWorldline::ObserverWorldline(const MetricModel& model, const Vec4d& seed, double tau_min,
                                     double tau_max, const Tolerances& tol)
    : seed_(seed), tau_min_(tau_min), tau_max_(tau_max) {
  if (!(tau_min <= 0.0 && tau_max >= 0.0) || tau_min == tau_max)
    throw ConfigError("worldline window must contain tau = 0");
  model.require_inside(seed);
  OdeRhs rhs = [&model](double, std::span<const double> y, std::span<double> dy) {
    Vec4d x{y[0], y[1], y[2], y[3]};
    model.require_inside(x, 1e-9);
    Vec4d v = model.observer(x);
    for (int a = 0; a < 4; ++a) dy[a] = v[a];
  };
  OdeOptions opt;
  opt.rtol = tol.ode_rel;
  opt.atol = tol.ode_abs;
  if (tau_max > 0.0) fwd_ = integrate_ode(rhs, seed, 0.0, tau_max, opt);
  if (tau_min < 0.0) bwd_ = integrate_ode(rhs, seed, 0.0, tau_min, opt);
}

Vec4d ObserverWorldline::at(double tau) const {
  if (tau < tau_min_ - 1e-9 || tau > tau_max_ + 1e-9)
    throw DomainError("worldline parameter outside integrated window");
  const DenseSolution& sol = (tau >= 0.0) ? fwd_ : bwd_;
  if (sol.t.empty()) return seed_;
  auto y = sol.eval(std::clamp(tau, tau_min_, tau_max_));
  return {y[0], y[1], y[2], y[3]};
}

namespace {

// Worldline parameter of the (chart-Euclidean) closest approach to a point:
// coarse scan plus golden-section refinement.
double closest_approach(const ObserverWorldline& wl, const Vec4d& p) {
  auto dist2 = [&](double tau) {
    Vec4d q = wl.at(tau);
    double s = 0.0;
    for (int a = 0; a < 4; ++a) s += (q[a] - p[a]) * (q[a] - p[a]);
    return s;
  };
  const int coarse = 128;
  double t0 = wl.tau_min(), t1 = wl.tau_max();
  double best = t0, bestval = dist2(t0);
  for (int i = 1; i <= coarse; ++i) {
    double tau = t0 + (t1 - t0) * i / double(coarse);
    double v = dist2(tau);
    if (v < bestval) {
      bestval = v;
      best = tau;
    }
  }
  double h = (t1 - t0) / coarse;
  double a = std::max(t0, best - h), b = std::min(t1, best + h);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = dist2(c), fd = dist2(d);
  for (int it = 0; it < 80 && (b - a) > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = dist2(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = dist2(d);
    }
  }
  return 0.5 * (a + b);
}

struct ShotResult {
  Vec4d endpoint;
  double tau_star;
  std::array<double, 3> miss;
  double miss_norm;
};

ShotResult shoot(const MetricModel& model, const Vec4d& event, const ObserverWorldline& wl,
                 const std::array<double, 3>& kappa, bool future, const Tolerances& tol) {
  Vec4d guess{0.0, kappa[0], kappa[1], kappa[2]};
  Vec4d k0 = null_project(model, event, guess, future);
  std::array<double, 8> y0{event[0], event[1], event[2], event[3], k0[0], k0[1], k0[2], k0[3]};
  OdeRhs rhs = [&model](double t, std::span<const double> y, std::span<double> dy) {
    geodesic_rhs(model, t, y, dy);
  };
  OdeOptions opt;
  opt.rtol = tol.ode_rel;
  opt.atol = tol.ode_abs;
  DenseSolution sol = integrate_ode(rhs, y0, 0.0, 1.0, opt);
  ShotResult r;
  const auto& yb = sol.y.back();
  r.endpoint = {yb[0], yb[1], yb[2], yb[3]};
  r.tau_star = closest_approach(wl, r.endpoint);
  Vec4d q = wl.at(r.tau_star);
  r.miss = {r.endpoint[1] - q[1], r.endpoint[2] - q[2], r.endpoint[3] - q[3]};
  r.miss_norm = std::sqrt(r.miss[0] * r.miss[0] + r.miss[1] * r.miss[1] + r.miss[2] * r.miss[2]);
  return r;
}

}  // namespace

ConnectionResult connect_observers(const MetricModel& model, const Vec4d& event,
                                   const ObserverWorldline& worldline, ShootDirection direction,
                                   const Tolerances& tol) {
  model.require_inside(event);
  const bool future = (direction == ShootDirection::future);

  // Initial guess: flat-chart ray toward the worldline point whose coordinate
  // time is consistent with a straight null line; smallest arrival wins ties.
  double tau_guess = worldline.tau_min();
  {
    double best_mismatch = std::numeric_limits<double>::infinity();
    const int nscan = 64;
    for (int i = 0; i <= nscan; ++i) {
      double tau =
          worldline.tau_min() + (worldline.tau_max() - worldline.tau_min()) * i / double(nscan);
      Vec4d q = worldline.at(tau);
      double dt = future ? (q[0] - event[0]) : (event[0] - q[0]);
      if (dt <= 0.0) continue;
      double dist = 0.0;
      for (int a = 1; a < 4; ++a) dist += (q[a] - event[a]) * (q[a] - event[a]);
      dist = std::sqrt(dist);
      double mism = std::abs(dt - dist);
      if (mism < best_mismatch - 1e-15) {
        best_mismatch = mism;
        tau_guess = tau;
      }
    }
    if (!std::isfinite(best_mismatch))
      tau_guess = 0.5 * (worldline.tau_min() + worldline.tau_max());
  }

  Vec4d target0 = worldline.at(tau_guess);
  std::array<double, 3> kappa{target0[1] - event[1], target0[2] - event[2],
                              target0[3] - event[3]};
  double len_scale = std::max(1.0, std::sqrt(kappa[0] * kappa[0] + kappa[1] * kappa[1] +
                                             kappa[2] * kappa[2]));

  ShotResult cur = shoot(model, event, worldline, kappa, future, tol);
  double best_miss = cur.miss_norm;
  int iter = 0;
  const int max_iter = 30;
  while (cur.miss_norm > 1e-12 * len_scale && iter < max_iter) {
    ++iter;
    // forward-difference Jacobian of the spatial miss w.r.t. kappa
    std::vector<std::vector<double>> jac(3, std::vector<double>(3));
    for (int j = 0; j < 3; ++j) {
      double delta = 1e-7 * (1.0 + std::abs(kappa[j]));
      auto kp = kappa;
      kp[j] += delta;
      ShotResult pert = shoot(model, event, worldline, kp, future, tol);
      for (int i = 0; i < 3; ++i) jac[i][j] = (pert.miss[i] - cur.miss[i]) / delta;
    }
    std::vector<double> step{-cur.miss[0], -cur.miss[1], -cur.miss[2]};
    solve_linear(jac, step, "connect_observers");

    double lambda = 1.0;
    bool improved = false;
    for (int half = 0; half < 7; ++half) {
      std::array<double, 3> trial{kappa[0] + lambda * step[0], kappa[1] + lambda * step[1],
                                  kappa[2] + lambda * step[2]};
      ShotResult next = shoot(model, event, worldline, trial, future, tol);
      if (next.miss_norm < cur.miss_norm) {
        kappa = trial;
        cur = next;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    best_miss = std::min(best_miss, cur.miss_norm);
    if (!improved) break;
  }

  if (cur.miss_norm > tol.shoot * len_scale)
    throw SolverError("connect_observers failed to converge; best spatial miss = " +
                          std::to_string(best_miss),
                      best_miss);

  Vec4d guess{0.0, kappa[0], kappa[1], kappa[2]};
  Vec4d k0 = null_project(model, event, guess, future);
  ConnectionResult out;
  if (future) {
    out.signal = integrate_null_geodesic(model, event, k0, 1.0, tol);
  } else {
    // integrate the past-pointing ray, then flip to emission->reception order
    LightSignal back;
    {
      // reuse the forward integrator by passing the past-pointing tangent
      // directly; null_project inside it must keep this orientation, so build
      // the signal manually here.
      std::array<double, 8> y0{event[0], event[1], event[2], event[3],
                               k0[0],    k0[1],    k0[2],    k0[3]};
      OdeRhs rhs = [&model](double t, std::span<const double> y, std::span<double> dy) {
        geodesic_rhs(model, t, y, dy);
      };
      OdeOptions opt;
      opt.rtol = tol.ode_rel;
      opt.atol = tol.ode_abs;
      DenseSolution sol = integrate_ode(rhs, y0, 0.0, 1.0, opt);
      const std::size_t n = sol.t.size();
      back.s.resize(n);
      back.x.resize(n);
      back.k.resize(n);
      back.dk.resize(n);
      back.null_norm.resize(n);
      back.hamiltonian.resize(n);
      back.frequency.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        back.s[i] = sol.t[i];
        for (int a = 0; a < 4; ++a) {
          back.x[i][a] = sol.y[i][a];
          back.k[i][a] = sol.y[i][4 + a];
          back.dk[i][a] = sol.f[i][4 + a];
        }
        Mat4d g = model.metric(back.x[i]);
        Vec4d v = model.observer(back.x[i]);
        back.null_norm[i] = contract(g, back.k[i], back.k[i]);
        Vec4d klow = lower_index(g, back.k[i]);
        Mat4d ginv = inverse4(g);
        double ham = 0.0;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) ham += 0.5 * ginv[a][b] * klow[a] * klow[b];
        back.hamiltonian[i] = ham;
        back.frequency[i] = std::abs(contract(g, v, back.k[i]));
      }
      back.kscale2 = reference_kscale2(model.metric(event), k0);
    }
    out.signal = back.reversed();
  }
  out.arrival_tau = cur.tau_star;
  out.miss = cur.miss_norm;
  out.iterations = iter;
  return out;
}

MessageSolution solve_infinitesimal_message(const MetricModel& model, const LightSignal& signal,
                                            const Tolerances& tol) {
  const Vec4d x0 = signal.x.front();
  const Vec4d k0 = signal.k.front();
  const Vec4d v0 = model.observer(x0);
  const Mat4d g0 = model.metric(x0);
  const Vec4d k0_low = lower_index(g0, k0);

  // State: x, K, then five (J, nabla_K J) blocks. Block 0 starts at J = V;
  // blocks 1..4 start at J = 0 with unit covariant derivative seeds.
  const int nblocks = 5;
  std::vector<double> y0(8 + 8 * nblocks, 0.0);
  for (int a = 0; a < 4; ++a) {
    y0[a] = x0[a];
    y0[4 + a] = k0[a];
    y0[8 + a] = v0[a];  // block 0: J = V, DJ = 0
  }
  for (int blk = 1; blk < nblocks; ++blk) y0[8 + 8 * blk + 4 + (blk - 1)] = 1.0;

  OdeRhs rhs = [&model](double, std::span<const double> y, std::span<double> dy) {
    Vec4d x{y[0], y[1], y[2], y[3]};
    Vec4d k{y[4], y[5], y[6], y[7]};
    MetricEvaluation me = evaluate_metric(model, x);
    auto gamma = detail::christoffel_from(me.g_inv, me.dg);
    RiemannEvaluation rie = riemann_from_eval(me);

    for (int a = 0; a < 4; ++a) dy[a] = k[a];
    for (int a = 0; a < 4; ++a) {
      double s = 0.0;
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) s += gamma[a][b][c] * k[b] * k[c];
      dy[4 + a] = -s;
    }
    for (int blk = 0; blk < 5; ++blk) {
      const double* J = &y[8 + 8 * blk];
      const double* DJ = J + 4;
      double* dJ = &dy[8 + 8 * blk];
      double* dDJ = dJ + 4;
      Vec4d jv{J[0], J[1], J[2], J[3]};
      Vec4d rkjk = riemann_apply(rie, k, jv, k);
      for (int a = 0; a < 4; ++a) {
        double gkj = 0.0, gkdj = 0.0;
        for (int b = 0; b < 4; ++b)
          for (int c = 0; c < 4; ++c) {
            gkj += gamma[a][b][c] * k[b] * J[c];
            gkdj += gamma[a][b][c] * k[b] * DJ[c];
          }
        dJ[a] = DJ[a] - gkj;
        dDJ[a] = rkjk[a] - gkdj;
      }
    }
  };

  OdeOptions opt;
  opt.rtol = tol.ode_rel;
  opt.atol = tol.ode_abs;
  DenseSolution sol = integrate_ode(rhs, y0, 0.0, 1.0, opt);

  const auto& last = sol.y.back();
  Vec4d x1{last[0], last[1], last[2], last[3]};
  Vec4d v1 = model.observer(x1);

  // Impose J(1) = c V(1) (rows 0..3) and g(K(0), nabla_K J(0)) = 0 (row 4) on
  // the coefficients of blocks 1..4 plus c.
  std::vector<std::vector<double>> m(5, std::vector<double>(5, 0.0));
  std::vector<double> rhsv(5, 0.0);
  for (int a = 0; a < 4; ++a) {
    for (int i = 0; i < 4; ++i) m[a][i] = last[8 + 8 * (i + 1) + a];
    m[a][4] = -v1[a];
    rhsv[a] = -last[8 + a];
  }
  for (int i = 0; i < 4; ++i) m[4][i] = k0_low[i];
  m[4][4] = 0.0;
  rhsv[4] = 0.0;
  try {
    solve_linear(m, rhsv, "infinitesimal message");
  } catch (const SolverError&) {
    throw SolverError(
        "infinitesimal message system is singular: conjugate-point / irregular-signal "
        "diagnostic (a nonzero Jacobi field vanishes at both endpoints)");
  }
  std::array<double, 4> coef{rhsv[0], rhsv[1], rhsv[2], rhsv[3]};
  double c = rhsv[4];

  MessageSolution ms;
  ms.c = c;
  const std::size_t n = sol.t.size();
  ms.s.resize(n);
  ms.x.resize(n);
  ms.k.resize(n);
  ms.jacobi.resize(n);
  ms.jacobi_der.resize(n);
  ms.v.resize(n);
  ms.parallax_residual.resize(n);
  ms.conserved.resize(n);

  double nu0 = std::abs(contract(g0, v0, k0));
  double freq_scale = std::max(nu0, 1e-300);
  double m0 = 0.0;
  ms.v_min = std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < n; ++i) {
    const auto& yi = sol.y[i];
    ms.s[i] = sol.t[i];
    Vec4d x{yi[0], yi[1], yi[2], yi[3]};
    Vec4d k{yi[4], yi[5], yi[6], yi[7]};
    ms.x[i] = x;
    ms.k[i] = k;
    Vec4d J{}, DJ{};
    for (int a = 0; a < 4; ++a) {
      J[a] = yi[8 + a];
      DJ[a] = yi[12 + a];
      for (int b = 0; b < 4; ++b) {
        J[a] += coef[b] * yi[8 + 8 * (b + 1) + a];
        DJ[a] += coef[b] * yi[8 + 8 * (b + 1) + 4 + a];
      }
    }
    ms.jacobi[i] = J;
    ms.jacobi_der[i] = DJ;

    Mat4d g = model.metric(x);
    Vec4d v = model.observer(x);
    double beta = contract(g, k, v);
    double gkj = contract(g, k, J);
    double vi = gkj / beta;
    ms.v[i] = vi;
    ms.v_min = std::min(ms.v_min, vi);
    ms.conserved[i] = contract(g, k, DJ);

    Vec4d w{};
    for (int a = 0; a < 4; ++a) w[a] = J[a] - vi * v[a];
    double b_coef = contract(g, w, k) / beta;
    double a_coef = (contract(g, w, v) + b_coef) / beta;
    Vec4d p{};
    for (int a = 0; a < 4; ++a) p[a] = w[a] - a_coef * k[a] - b_coef * v[a];
    ms.parallax_residual[i] = std::sqrt(std::abs(contract(g, p, p)));

    double mcvf = vi * beta;  // = g(K, vV), the message's own conserved quantity
    if (i == 0) m0 = mcvf;
    ms.message_cvf_drift = std::max(ms.message_cvf_drift, std::abs(mcvf - m0) / freq_scale);
    ms.conserved_drift = std::max(ms.conserved_drift, std::abs(ms.conserved[i]) / freq_scale);
    ms.max_parallax_residual = std::max(ms.max_parallax_residual, ms.parallax_residual[i]);
  }

  Vec4d end_diff{};
  for (int a = 0; a < 4; ++a) end_diff[a] = ms.jacobi.back()[a] - c * v1[a];
  ms.endpoint_residual = max_abs(end_diff);
  return ms;
}

ParallaxReport parallax_verdict(const MetricModel& model, const ParallaxProbe& probe,
                                const Tolerances& tol) {
  if (probe.samples < 2) throw ConfigError("parallax probe needs at least 2 reception samples");
  ObserverWorldline receiver(model, probe.receiver_seed, -1e-6, probe.window, tol);
  ObserverWorldline source1(model, probe.source1_seed, -probe.lookback, probe.window + 1e-6, tol);
  ObserverWorldline source2(model, probe.source2_seed, -probe.lookback, probe.window + 1e-6, tol);

  ParallaxReport rep;
  rep.v_min = std::numeric_limits<double>::infinity();
  double cos0 = 0.0;
  for (int i = 0; i < probe.samples; ++i) {
    double tau = probe.window * i / double(probe.samples - 1);
    Vec4d q = receiver.at(tau);
    Mat4d g = model.metric(q);
    Vec4d v = model.observer(q);

    auto view = [&](const ObserverWorldline& src) {
      ConnectionResult conn = connect_observers(model, q, src, ShootDirection::past, tol);
      MessageSolution msg = solve_infinitesimal_message(model, conn.signal, tol);
      Vec4d k = conn.signal.k.back();
      Vec4d y{};
      double kv = contract(g, k, v);
      for (int a = 0; a < 4; ++a) y[a] = k[a] + kv * v[a];
      return std::make_pair(y, msg);
    };
    auto [y1, msg1] = view(source1);
    auto [y2, msg2] = view(source2);

    ParallaxSampleRow row;
    row.tau = tau;
    row.cos_angle =
        contract(g, y1, y2) / std::sqrt(contract(g, y1, y1) * contract(g, y2, y2));
    row.parallax_residual = std::max(msg1.max_parallax_residual, msg2.max_parallax_residual);
    row.conserved_drift = std::max(msg1.conserved_drift, msg2.conserved_drift);
    row.v_min = std::min(msg1.v_min, msg2.v_min);
    rep.rows.push_back(row);

    if (i == 0) cos0 = row.cos_angle;
    rep.angle_drift = std::max(rep.angle_drift, std::abs(row.cos_angle - cos0));
    rep.max_parallax_residual = std::max(rep.max_parallax_residual, row.parallax_residual);
    rep.max_conserved_drift = std::max(rep.max_conserved_drift, row.conserved_drift);
    rep.v_min = std::min(rep.v_min, row.v_min);
  }
  return rep;
}

}  // namespace confstat
