#pragma once

#include <array>

#include "confstat/linalg.hpp"
#include "confstat/model.hpp"
#include "confstat/tolerances.hpp"

namespace confstat {

// Tangent vector anchored at a chart point.
struct TangentVector {
  Vec4d base{};
  Vec4d comps{};
};

// Metric with its first and second coordinate derivatives at one event, all
// produced by nested dual-number evaluation of the model's component
// functions (exact to machine precision).
struct MetricEvaluation {
  Vec4d point{};
  Mat4d g{};
  Mat4d g_inv{};
  std::array<Mat4d, 4> dg{};                  // dg[c][a][b]    = d_c g_ab
  std::array<std::array<Mat4d, 4>, 4> d2g{};  // d2g[d][c][a][b] = d_d d_c g_ab
  double det = 0.0;
};

struct ConnectionCoefficients {
  Vec4d point{};
  std::array<Mat4d, 4> gamma{};  // gamma[a][b][c] = Gamma^a_{bc}
};

// R^a_{bcd} with the commutator convention [nabla_c, nabla_d] W^a = R^a_{bcd} W^b,
// which makes the geodesic-deviation equation read D^2 J/ds^2 = R(K,J)K;
// the sign is pinned by a deviation test against pairs of integrated geodesics.
struct RiemannEvaluation {
  Vec4d point{};
  std::array<std::array<Mat4d, 4>, 4> riem{};  // riem[a][b][c][d] = R^a_{bcd}
};

namespace detail {

// d_c g_ab at scalar depth S, via one extra dual level.
template <class S>
std::array<Mat4<S>, 4> metric_first_derivs(const MetricModel& m, const Vec4<S>& x) {
  std::array<Mat4<S>, 4> dg;
  for (int c = 0; c < 4; ++c) {
    Vec4<Dual<S>> xd;
    for (int a = 0; a < 4; ++a) xd[a] = Dual<S>(x[a], S(a == c ? 1.0 : 0.0));
    Mat4<Dual<S>> gd = m.metric(xd);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) dg[c][a][b] = gd[a][b].d;
  }
  return dg;
}

template <class S>
std::array<Vec4<S>, 4> observer_first_derivs(const MetricModel& m, const Vec4<S>& x) {
  std::array<Vec4<S>, 4> dv;
  for (int c = 0; c < 4; ++c) {
    Vec4<Dual<S>> xd;
    for (int a = 0; a < 4; ++a) xd[a] = Dual<S>(x[a], S(a == c ? 1.0 : 0.0));
    Vec4<Dual<S>> vd = m.observer(xd);
    for (int a = 0; a < 4; ++a) dv[c][a] = vd[a].d;
  }
  return dv;
}

template <class S>
std::array<Mat4<S>, 4> christoffel_from(const Mat4<S>& ginv, const std::array<Mat4<S>, 4>& dg) {
  std::array<Mat4<S>, 4> gam;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        S s = S(0.0);
        for (int d = 0; d < 4; ++d)
          s = s + ginv[a][d] * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
        gam[a][b][c] = 0.5 * s;
      }
  return gam;
}

template <class S>
std::array<Mat4<S>, 4> christoffel(const MetricModel& m, const Vec4<S>& x) {
  Mat4<S> g = m.metric(x);
  Mat4<S> ginv = inverse4(g);
  return christoffel_from(ginv, metric_first_derivs(m, x));
}

}  // namespace detail

MetricEvaluation evaluate_metric(const MetricModel& model, const Vec4d& p,
                                 const Tolerances& tol = {});
ConnectionCoefficients christoffel_at(const MetricModel& model, const Vec4d& p,
                                      const Tolerances& tol = {});
RiemannEvaluation riemann_at(const MetricModel& model, const Vec4d& p, const Tolerances& tol = {});

// Assemble curvature from an existing evaluation (shared by the Jacobi
// integrator, which needs Gamma and R per right-hand-side call).
RiemannEvaluation riemann_from_eval(const MetricEvaluation& me);

// g_ab X^a Y^b; both vectors must be anchored at the evaluation point.
double inner(const MetricEvaluation& me, const TangentVector& x, const TangentVector& y);

// (R(X,Y)Z)^a = R^a_{bcd} Z^b X^c Y^d. The geodesic-deviation right-hand side
// is riemann_apply(R, K, J, K).
Vec4d riemann_apply(const RiemannEvaluation& r, const Vec4d& x, const Vec4d& y, const Vec4d& z);

}  // namespace confstat
