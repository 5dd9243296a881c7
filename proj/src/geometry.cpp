#include "confstat/geometry.hpp"

#include <cmath>
#include <sstream>

namespace confstat {

void Tolerances::set(const std::string& key, double v) {
  if (!(v > 0.0)) throw ConfigError("tolerance '" + key + "' must be positive");
  if (key == "geom") geom = v;
  else if (key == "linalg") linalg = v;
  else if (key == "degenerate") degenerate = v;
  else if (key == "norm") norm = v;
  else if (key == "null_drift") null_drift = v;
  else if (key == "ode_rel") ode_rel = v;
  else if (key == "ode_abs") ode_abs = v;
  else if (key == "quad") quad = v;
  else if (key == "path") path = v;
  else if (key == "phi") phi = v;
  else if (key == "redshift") redshift = v;
  else if (key == "shoot") shoot = v;
  else if (key == "stationarity") stationarity = v;
  else if (key == "conformal_residual") conformal_residual = v;
  else if (key == "parallel") parallel = v;
  else if (key == "theta_floor") theta_floor = v;
  else throw ConfigError("unknown tolerance key '" + key + "'");
}

std::map<std::string, double> Tolerances::as_map() const {
  return {{"geom", geom},
          {"linalg", linalg},
          {"degenerate", degenerate},
          {"norm", norm},
          {"null_drift", null_drift},
          {"ode_rel", ode_rel},
          {"ode_abs", ode_abs},
          {"quad", quad},
          {"path", path},
          {"phi", phi},
          {"redshift", redshift},
          {"shoot", shoot},
          {"stationarity", stationarity},
          {"conformal_residual", conformal_residual},
          {"parallel", parallel},
          {"theta_floor", theta_floor}};
}

namespace {

std::string fmt_event(const Vec4d& p) {
  std::ostringstream os;
  os << "(" << p[0] << ", " << p[1] << ", " << p[2] << ", " << p[3] << ")";
  return os.str();
}

}  // namespace

MetricEvaluation evaluate_metric(const MetricModel& model, const Vec4d& p, const Tolerances& tol) {
  model.require_inside(p);

  MetricEvaluation me;
  me.point = p;
  me.g = model.metric(p);
  me.det = det4(me.g);
  if (std::abs(me.det) < tol.degenerate)
    throw GeometryError("metric degenerate at " + fmt_event(p) +
                        ": |det g| = " + std::to_string(std::abs(me.det)));
  me.g_inv = inverse4(me.g, me.det);

  me.dg = detail::metric_first_derivs(model, p);

  // Second derivatives: seed the inner dual level with direction c and the
  // outer level with direction d.
  for (int d = 0; d < 4; ++d)
    for (int c = 0; c < 4; ++c) {
      Vec4<D2> xd;
      for (int a = 0; a < 4; ++a)
        xd[a] = D2(D1(p[a], a == c ? 1.0 : 0.0), D1(a == d ? 1.0 : 0.0, 0.0));
      Mat4<D2> gd = model.metric(xd);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) me.d2g[d][c][a][b] = gd[a][b].d.d;
    }
  return me;
}

ConnectionCoefficients christoffel_at(const MetricModel& model, const Vec4d& p,
                                      const Tolerances& tol) {
  MetricEvaluation me = evaluate_metric(model, p, tol);
  ConnectionCoefficients cc;
  cc.point = p;
  cc.gamma = detail::christoffel_from(me.g_inv, me.dg);
  return cc;
}

RiemannEvaluation riemann_at(const MetricModel& model, const Vec4d& p, const Tolerances& tol) {
  return riemann_from_eval(evaluate_metric(model, p, tol));
}

RiemannEvaluation riemann_from_eval(const MetricEvaluation& me) {
  auto gamma = detail::christoffel_from(me.g_inv, me.dg);

  // d_c g^{ae} = -g^{af} (d_c g_fh) g^{he}
  std::array<Mat4d, 4> dginv{};
  for (int c = 0; c < 4; ++c)
    for (int a = 0; a < 4; ++a)
      for (int e = 0; e < 4; ++e) {
        double s = 0.0;
        for (int f = 0; f < 4; ++f)
          for (int h = 0; h < 4; ++h) s += me.g_inv[a][f] * me.dg[c][f][h] * me.g_inv[h][e];
        dginv[c][a][e] = -s;
      }

  // d_c Gamma^a_{bd}
  auto dgamma = [&](int c, int a, int b, int d) {
    double s = 0.0;
    for (int e = 0; e < 4; ++e) {
      s += 0.5 * dginv[c][a][e] * (me.dg[b][e][d] + me.dg[d][e][b] - me.dg[e][b][d]);
      s += 0.5 * me.g_inv[a][e] *
           (me.d2g[c][b][e][d] + me.d2g[c][d][e][b] - me.d2g[c][e][b][d]);
    }
    return s;
  };

  RiemannEvaluation re;
  re.point = me.point;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double s = dgamma(c, a, d, b) - dgamma(d, a, c, b);
          for (int e = 0; e < 4; ++e)
            s += gamma[a][c][e] * gamma[e][d][b] - gamma[a][d][e] * gamma[e][c][b];
          re.riem[a][b][c][d] = s;
        }
  return re;
}

double inner(const MetricEvaluation& me, const TangentVector& x, const TangentVector& y) {
  if (max_abs(vec_sub(x.base, me.point)) > 1e-12 || max_abs(vec_sub(y.base, me.point)) > 1e-12)
    throw GeometryError("inner(): tangent vectors not based at the evaluation point");
  return contract(me.g, x.comps, y.comps);
}

Vec4d riemann_apply(const RiemannEvaluation& r, const Vec4d& x, const Vec4d& y, const Vec4d& z) {
  Vec4d out{};
  for (int a = 0; a < 4; ++a) {
    double s = 0.0;
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) s += r.riem[a][b][c][d] * z[b] * x[c] * y[d];
    out[a] = s;
  }
  return out;
}

}  // namespace confstat
