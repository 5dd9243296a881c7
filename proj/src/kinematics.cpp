#include "confstat/kinematics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace confstat {

namespace {

// Fields along one coordinate direction: value-and-derivative view of the
// kinematics at p, seeded in direction c.
detail::KinCore<D1> kin_dual(const MetricModel& m, const Vec4d& p, int c) {
  Vec4<D1> x;
  for (int a = 0; a < 4; ++a) x[a] = D1(p[a], a == c ? 1.0 : 0.0);
  return detail::kin_core(m, x);
}

}  // namespace

Mat4d nabla_V(const MetricModel& model, const Vec4d& p) {
  model.require_inside(p);
  auto core = detail::kin_core(model, p);
  return core.nabla_v;
}

double lie_V_metric_residual(const MetricModel& model, const Vec4d& p) {
  model.require_inside(p);
  auto core = detail::kin_core(model, p);
  auto dg = detail::metric_first_derivs(model, p);
  auto dv = detail::observer_first_derivs(model, p);

  // (L_V g)_ab = V^c d_c g_ab + g_cb d_a V^c + g_ac d_b V^c
  Mat4d lie{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double s = 0.0;
      for (int c = 0; c < 4; ++c)
        s += core.V[c] * dg[c][a][b] + core.g[c][b] * dv[a][c] + core.g[a][c] * dv[b][c];
      lie[a][b] = s;
    }
  Mat4d rhs = mat_scale(2.0, sym2(core.nabla_v));
  return max_abs(mat_sub(lie, rhs));
}

KinematicsSample kinematics_at(const MetricModel& model, const Vec4d& p, const Tolerances& tol) {
  model.require_inside(p);
  auto core = detail::kin_core(model, p);

  if (std::abs(core.norm_violation) > tol.norm) {
    std::ostringstream os;
    os << "observer normalization violated at (" << p[0] << ", " << p[1] << ", " << p[2] << ", "
       << p[3] << "): g(V,V)+1 = " << core.norm_violation;
    throw GeometryError(os.str());
  }

  KinematicsSample s;
  s.point = p;
  s.g = core.g;
  s.g_inv = core.ginv;
  s.nabla_v = core.nabla_v;
  s.theta = core.theta;
  s.shear = core.sigma;
  s.rotation = core.omega;
  s.projector = core.proj;
  s.accel = TangentVector{p, core.accel_up};
  s.accel_form = core.accel;
  s.u = core.u;
  s.rho = core.rho;

  // d rho by exterior differentiation of the composed rho components.
  Mat4d drho_partial{};  // drho_partial[c][b] = d_c rho_b
  for (int c = 0; c < 4; ++c) {
    auto kd = kin_dual(model, p, c);
    for (int b = 0; b < 4; ++b) drho_partial[c][b] = kd.rho[b].d;
  }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) s.d_rho[a][b] = drho_partial[a][b] - drho_partial[b][a];

  s.shear_norm = tensor_norm(s.shear, s.g_inv);
  s.rotation_norm = tensor_norm(s.rotation, s.g_inv);
  s.drho_norm = tensor_norm(s.d_rho, s.g_inv);
  s.accel_norm2 = contract(s.g, core.accel_up, core.accel_up);

  s.residuals.decomposition = decomposition_residual(s);
  Vec4d sigma_v{}, omega_v{}, h_v{};
  for (int b = 0; b < 4; ++b) {
    double sv = 0, ov = 0, hv = 0;
    for (int a = 0; a < 4; ++a) {
      sv += s.shear[a][b] * core.V[a];
      ov += s.rotation[a][b] * core.V[a];
      hv += s.projector[a][b] * core.V[a];
    }
    sigma_v[b] = sv;
    omega_v[b] = ov;
    h_v[b] = hv;
  }
  s.residuals.perp_shear = max_abs(sigma_v);
  s.residuals.perp_rotation = max_abs(omega_v);
  s.residuals.perp_projector = max_abs(h_v);
  double trace_h = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) trace_h += s.g_inv[a][b] * s.projector[a][b];
  s.residuals.trace_projector = std::abs(trace_h - 3.0);
  s.residuals.accel_orthogonality = std::abs(pair(s.accel_form, core.V));
  s.residuals.normalization = std::abs(core.norm_violation);
  s.residuals.lie_metric = lie_V_metric_residual(model, p);
  return s;
}

double decomposition_residual(const KinematicsSample& sample) {
  Mat4d rhs{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      rhs[a][b] = (sample.theta / 3.0) * sample.projector[a][b] + sample.shear[a][b] +
                  sample.rotation[a][b] - sample.accel_form[a] * sample.u[b];
  return max_abs(mat_sub(sample.nabla_v, rhs));
}

IntegrabilityResiduals integrability_check(const MetricModel& model, const Vec4d& p) {
  model.require_inside(p);
  auto core = detail::kin_core(model, p);
  double theta = core.theta;

  // Directional views; seed c gives d_c of every field.
  std::array<detail::KinCore<D1>, 4> dual;
  for (int c = 0; c < 4; ++c) dual[c] = kin_dual(model, p, c);

  auto domega = [&](int c, int a, int b) { return dual[c].omega[a][b].d; };
  auto daccel = [&](int c, int b) { return dual[c].accel[b].d; };
  auto dtheta = [&](int c) { return dual[c].theta.d; };

  // w_b = (V .| omega)_b = V^a omega_ab, differentiated through the dual level.
  Mat4d dw{};  // dw[c][b] = d_c w_b
  Vec4d w{};
  for (int c = 0; c < 4; ++c)
    for (int b = 0; b < 4; ++b) {
      D1 s(0.0);
      for (int a = 0; a < 4; ++a) s = s + dual[c].V[a] * dual[c].omega[a][b];
      dw[c][b] = s.d;
      if (c == 0) w[b] = s.v;
    }

  // L_V omega = V .| d omega + d(V .| omega)
  Mat4d lie_omega{};
  for (int b = 0; b < 4; ++b)
    for (int c = 0; c < 4; ++c) {
      double s = 0.0;
      for (int a = 0; a < 4; ++a)
        s += core.V[a] * (domega(a, b, c) - domega(b, a, c) + domega(c, a, b));
      s += dw[b][c] - dw[c][b];
      lie_omega[b][c] = s;
    }

  IntegrabilityResiduals out;
  Mat4d rhs_omega{};
  for (int b = 0; b < 4; ++b)
    for (int c = 0; c < 4; ++c) rhs_omega[b][c] = (theta / 6.0) * core.omega[b][c];
  out.rotation = max_abs(mat_sub(lie_omega, rhs_omega));

  // L_V A = V .| dA + d(A(V)); A(V) vanishes identically but is differentiated
  // anyway rather than assumed away.
  Vec4d lie_accel{};
  for (int b = 0; b < 4; ++b) {
    double s = 0.0;
    for (int a = 0; a < 4; ++a) s += core.V[a] * (daccel(a, b) - daccel(b, a));
    D1 av(0.0);
    for (int a = 0; a < 4; ++a) av = av + dual[b].accel[a] * dual[b].V[a];
    lie_accel[b] = s + av.d;
  }

  // (1/3) h(dTheta - (theta/2) A), projecting the covector with h^c_b.
  Vec4d wvec{};
  for (int b = 0; b < 4; ++b) wvec[b] = dtheta(b) - 0.5 * theta * core.accel[b];
  double w_on_v = pair(wvec, core.V);
  Vec4d rhs_accel{};
  for (int b = 0; b < 4; ++b) rhs_accel[b] = (wvec[b] + w_on_v * core.u[b]) / 3.0;

  Vec4d diff{};
  for (int b = 0; b < 4; ++b) diff[b] = lie_accel[b] - rhs_accel[b];
  out.acceleration = max_abs(diff);
  return out;
}

ExclusionResult expansion_rotation_exclusion(const MetricModel& model, const Vec4d& p,
                                             bool certified_stationary, const Tolerances& tol) {
  KinematicsSample s = kinematics_at(model, p, tol);
  ExclusionResult r;
  r.theta = s.theta;
  r.rotation_norm = s.rotation_norm;
  r.accel_norm = std::sqrt(std::abs(s.accel_norm2));
  if (!certified_stationary || r.accel_norm > tol.geom) {
    r.status = ExclusionResult::Status::precondition_violated;
    r.product = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.status = ExclusionResult::Status::ok;
  r.product = std::abs(s.theta) * s.rotation_norm;
  return r;
}

}  // namespace confstat
