#include "confstat/conformal.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "confstat/ode.hpp"
#include "confstat/quadrature.hpp"

namespace confstat {

namespace {

// rho pulled back to the straight segment anchor -> target, contracted with
// the segment direction. Scalar-generic so the same code yields the
// differential of the reconstructed potential when the target is dual.
template <class S>
S path_integrand(const MetricModel& model, const Vec4d& anchor, const Vec4<S>& target, double t) {
  Vec4<S> x, delta;
  for (int a = 0; a < 4; ++a) {
    delta[a] = target[a] - anchor[a];
    x[a] = anchor[a] + t * delta[a];
  }
  auto core = detail::kin_core(model, x);
  S s = S(0.0);
  for (int a = 0; a < 4; ++a) s = s + core.rho[a] * delta[a];
  return s;
}

struct PathIntegral {
  double value;
  int panels;
};

PathIntegral ln_f_segment(const MetricModel& model, const Vec4d& anchor, const Vec4d& target,
                          const Tolerances& tol) {
  model.require_inside(anchor);
  model.require_inside(target);
  auto q = [&](double t) { return path_integrand<double>(model, anchor, target, t); };
  auto r = adaptive_gl(q, tol.quad);
  return {r.value, r.panels};
}

}  // namespace

std::vector<Vec4d> grid_events(const Box& region, const GridSpec& grid) {
  for (int a = 0; a < 4; ++a)
    if (grid.n[a] < 2) throw ConfigError("grid resolution must be >= 2 per axis");
  std::vector<Vec4d> events;
  events.reserve(grid.total());
  for (int i0 = 0; i0 < grid.n[0]; ++i0)
    for (int i1 = 0; i1 < grid.n[1]; ++i1)
      for (int i2 = 0; i2 < grid.n[2]; ++i2)
        for (int i3 = 0; i3 < grid.n[3]; ++i3) {
          int idx[4] = {i0, i1, i2, i3};
          Vec4d p;
          for (int a = 0; a < 4; ++a)
            p[a] = region.lo[a] + (region.hi[a] - region.lo[a]) * idx[a] / double(grid.n[a] - 1);
          events.push_back(p);
        }
  return events;
}

void parallel_for_index(int count, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

ConformalCandidate::ConformalCandidate(const MetricModel& model, const Vec4d& anchor,
                                       Tolerances tol)
    : model_(&model), anchor_(anchor), tol_(tol) {
  model.require_inside(anchor);
}

double ConformalCandidate::ln_f(const Vec4d& target) const {
  return ln_f_segment(*model_, anchor_, target, tol_).value + std::log(gauge_factor_);
}

double ConformalCandidate::f(const Vec4d& target) const {
  return gauge_factor_ * std::exp(ln_f_segment(*model_, anchor_, target, tol_).value) + shift_;
}

Vec4d ConformalCandidate::d_ln_f(const Vec4d& target) const {
  // converge the panel count on the value, then differentiate the quadrature
  // at that fixed resolution
  int panels = ln_f_segment(*model_, anchor_, target, tol_).panels;
  Vec4d grad{};
  for (int dir = 0; dir < 4; ++dir) {
    Vec4<D1> td;
    for (int a = 0; a < 4; ++a) td[a] = D1(target[a], a == dir ? 1.0 : 0.0);
    auto q = [&](double t) { return path_integrand<D1>(*model_, anchor_, td, t); };
    grad[dir] = composite_gl<D1>(q, panels).d;
  }
  return grad;
}

Vec4d ConformalCandidate::df(const Vec4d& target) const {
  double fr = gauge_factor_ * std::exp(ln_f_segment(*model_, anchor_, target, tol_).value);
  Vec4d g = d_ln_f(target);
  return vec_scale(fr, g);
}

double ConformalCandidate::phi_from_df(const Vec4d& target) const {
  Vec4d v = model_->observer(target);
  return 2.0 * pair(df(target), v);
}

double ConformalCandidate::phi_from_theta(const Vec4d& target) const {
  auto core = detail::kin_core(*model_, target);
  return (2.0 / 3.0) * f(target) * core.theta;
}

TangentVector ConformalCandidate::cvf(const Vec4d& target) const {
  Vec4d v = model_->observer(target);
  return TangentVector{target, vec_scale(f(target), v)};
}

ConformalCandidate ConformalCandidate::rescaled(double factor) const {
  if (!(factor > 0.0)) throw ConfigError("gauge factor must be positive");
  ConformalCandidate c = *this;
  c.gauge_factor_ *= factor;
  return c;
}

ConformalCandidate ConformalCandidate::shifted(double offset) const {
  ConformalCandidate c = *this;
  c.shift_ += offset;
  return c;
}

double reconstruct_ln_f(const MetricModel& model, const Vec4d& anchor, const Vec4d& target,
                        const Tolerances& tol) {
  return ln_f_segment(model, anchor, target, tol).value;
}

double reconstruct_ln_f_via(const MetricModel& model, const Vec4d& anchor, const Vec4d& waypoint,
                            const Vec4d& target, const Tolerances& tol) {
  return ln_f_segment(model, anchor, waypoint, tol).value +
         ln_f_segment(model, waypoint, target, tol).value;
}

double conformal_residual(const MetricModel& model, const ConformalCandidate& candidate,
                          const Vec4d& p) {
  auto core = detail::kin_core(model, p);
  auto dg = detail::metric_first_derivs(model, p);
  auto dv = detail::observer_first_derivs(model, p);

  // (L_V g)_ab from first principles
  Mat4d lie_v{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double s = 0.0;
      for (int c = 0; c < 4; ++c)
        s += core.V[c] * dg[c][a][b] + core.g[c][b] * dv[a][c] + core.g[a][c] * dv[b][c];
      lie_v[a][b] = s;
    }

  double fv = candidate.f(p);
  Vec4d dfv = candidate.df(p);
  Mat4d lie_xi = mat_add(mat_scale(fv, lie_v), vee(dfv, core.u));

  double phi = (2.0 / 3.0) * fv * core.theta;
  Mat4d diff = mat_sub(lie_xi, mat_scale(phi, core.g));
  return max_abs(diff);
}

const char* to_string(StationarityVerdict::Result r) {
  switch (r) {
    case StationarityVerdict::Result::conformally_stationary: return "conformally_stationary";
    case StationarityVerdict::Result::not_stationary: return "not_stationary";
    default: return "inconclusive";
  }
}

StationarityVerdict stationarity_scan(const MetricModel& model, const Box& region,
                                      const GridSpec& grid, const Tolerances& tol, int workers) {
  auto events = grid_events(region, grid);
  const int n = int(events.size());

  std::vector<double> shear(n), drho(n), shear_scaled(n), drho_scaled(n);
  parallel_for_index(n, workers, [&](int i) {
    KinematicsSample s = kinematics_at(model, events[i], tol);
    double scale = 1.0 + tensor_norm(s.nabla_v, s.g_inv);
    shear[i] = s.shear_norm;
    drho[i] = s.drho_norm;
    shear_scaled[i] = s.shear_norm / scale;
    drho_scaled[i] = s.drho_norm / scale;
  });

  StationarityVerdict v;
  v.grid_points = n;
  v.threshold = tol.stationarity;
  for (int i = 0; i < n; ++i) {
    v.shear_sup = std::max(v.shear_sup, shear[i]);
    v.drho_sup = std::max(v.drho_sup, drho[i]);
    v.shear_sup_scaled = std::max(v.shear_sup_scaled, shear_scaled[i]);
    v.drho_sup_scaled = std::max(v.drho_sup_scaled, drho_scaled[i]);
  }
  v.conformal_residual_sup = std::numeric_limits<double>::quiet_NaN();
  v.conformal_residual_sup_scaled = std::numeric_limits<double>::quiet_NaN();

  const double thr = tol.stationarity;
  double smax = std::max(v.shear_sup_scaled, v.drho_sup_scaled);

  if (smax >= 10.0 * thr) {
    v.verdict = StationarityVerdict::Result::not_stationary;
    return v;
  }

  if (smax < thr) {
    // pointwise conditions pass; confirm via the conformal equation itself
    v.anchor = region.center();
    v.candidate_built = true;
    ConformalCandidate cand(model, v.anchor, tol);
    std::vector<double> res(n), res_scaled(n);
    parallel_for_index(n, workers, [&](int i) {
      double r = conformal_residual(model, cand, events[i]);
      res[i] = r;
      double scale = std::max(1.0, std::abs(cand.f(events[i]))) *
                     std::max(1.0, max_abs(model.metric(events[i])));
      res_scaled[i] = r / scale;
    });
    v.conformal_residual_sup = 0.0;
    v.conformal_residual_sup_scaled = 0.0;
    for (int i = 0; i < n; ++i) {
      v.conformal_residual_sup = std::max(v.conformal_residual_sup, res[i]);
      v.conformal_residual_sup_scaled = std::max(v.conformal_residual_sup_scaled, res_scaled[i]);
    }
    if (v.conformal_residual_sup_scaled >= 10.0 * thr) {
      v.verdict = StationarityVerdict::Result::not_stationary;
      return v;
    }
    double worst = std::max(smax, v.conformal_residual_sup_scaled);
    // refuse to certify borderline numerics: anything within a factor 10 of
    // the threshold stays inconclusive
    v.verdict = (worst < 0.1 * thr) ? StationarityVerdict::Result::conformally_stationary
                                    : StationarityVerdict::Result::inconclusive;
    return v;
  }

  v.verdict = StationarityVerdict::Result::inconclusive;
  return v;
}

RatioStatistics equivalence_class_check(const ConformalCandidate& a, const ConformalCandidate& b,
                                        const Box& region, const GridSpec& grid) {
  auto events = grid_events(region, grid);
  RatioStatistics st;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  KahanSum sum;
  for (const auto& p : events) {
    double r = a.f(p) / b.f(p);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    sum.add(r);
  }
  st.mean = sum.total() / double(events.size());
  st.spread = hi - lo;
  return st;
}

double angle_preservation_check(const MetricModel& model, const ConformalCandidate& candidate,
                                const Vec4d& start, double parameter_span, const Vec4d& x0,
                                const Vec4d& y0, int samples) {
  model.require_inside(start);

  // fixed component gauge: hold the initially largest component of each
  // transported vector constant
  auto argmax_abs = [](const Vec4d& v) {
    int j = 0;
    for (int a = 1; a < 4; ++a)
      if (std::abs(v[a]) > std::abs(v[j])) j = a;
    return j;
  };
  const int jx = argmax_abs(x0);
  const int jy = argmax_abs(y0);

  // state: x, X, Y, ln f
  std::array<double, 13> y0state{};
  for (int a = 0; a < 4; ++a) {
    y0state[a] = start[a];
    y0state[4 + a] = x0[a];
    y0state[8 + a] = y0[a];
  }
  y0state[12] = candidate.ln_f(start);

  OdeRhs rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    Vec4d x{y[0], y[1], y[2], y[3]};
    model.require_inside(x, 1e-9);
    auto core = detail::kin_core(model, x);
    auto dv = detail::observer_first_derivs(model, x);
    double fv = std::exp(y[12]);

    // d_a xi^b = f (rho_a V^b + d_a V^b); d ln f = rho on a certified model
    Mat4d dxi{};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) dxi[a][b] = fv * (core.rho[a] * core.V[b] + dv[a][b]);

    for (int a = 0; a < 4; ++a) dy[a] = fv * core.V[a];

    auto transport = [&](const double* w, double* dw, int gauge_index) {
      Vec4d adv{};
      for (int b = 0; b < 4; ++b) {
        double s = 0.0;
        for (int a = 0; a < 4; ++a) s += w[a] * dxi[a][b];
        adv[b] = s;
      }
      double alpha = -adv[gauge_index] / w[gauge_index];
      for (int b = 0; b < 4; ++b) dw[b] = adv[b] + alpha * w[b];
    };
    transport(&y[4], &dy[4], jx);
    transport(&y[8], &dy[8], jy);

    dy[12] = fv * pair(core.rho, core.V);
  };

  OdeOptions opt;
  opt.rtol = 1e-11;
  opt.atol = 1e-13;
  DenseSolution sol = integrate_ode(rhs, y0state, 0.0, parameter_span, opt);

  auto cos_angle = [&](const std::vector<double>& st) {
    Vec4d x{st[0], st[1], st[2], st[3]};
    Vec4d xv{st[4], st[5], st[6], st[7]};
    Vec4d yv{st[8], st[9], st[10], st[11]};
    Mat4d g = model.metric(x);
    double xx = contract(g, xv, xv);
    double yy = contract(g, yv, yv);
    if (std::abs(xx) < 1e-14 || std::abs(yy) < 1e-14)
      throw GeometryError("angle_preservation_check: transported vector became null");
    return contract(g, xv, yv) / std::sqrt(std::abs(xx * yy));
  };

  double c0 = cos_angle(sol.y.front());
  double drift = 0.0;
  for (int i = 1; i <= samples; ++i) {
    double s = parameter_span * double(i) / double(samples);
    drift = std::max(drift, std::abs(cos_angle(sol.eval(s)) - c0));
  }
  return drift;
}

}  // namespace confstat
