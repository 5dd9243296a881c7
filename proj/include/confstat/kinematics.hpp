#pragma once

#include "confstat/geometry.hpp"

namespace confstat {

namespace detail {

// Everything the kinematical decomposition needs at one event, generic in the
// scalar type so the same code produces values (S = double) and coordinate
// derivatives of any of these fields (S = D1).
template <class S>
struct KinCore {
  Mat4<S> g{}, ginv{};
  Vec4<S> V{}, u{};          // observer and its metric dual u_a = g(V,.)_a
  Mat4<S> nabla_v{};         // B_ab = g(E_a, nabla_{E_b} V)
  S theta{};
  Vec4<S> accel_up{};        // (nabla_V V)^a
  Vec4<S> accel{};           // A_a = g(nabla_V V, .)_a
  Mat4<S> proj{};            // h = g + u (x) u
  Mat4<S> sigma{}, omega{};
  Vec4<S> rho{};             // A - (theta/3) u
  S norm_violation{};        // g(V,V) + 1
};

template <class S>
KinCore<S> kin_core(const MetricModel& m, const Vec4<S>& x) {
  KinCore<S> k;
  k.g = m.metric(x);
  k.ginv = inverse4(k.g);
  k.V = m.observer(x);
  k.u = lower_index(k.g, k.V);
  k.norm_violation = pair(k.u, k.V) + 1.0;

  auto dg = metric_first_derivs(m, x);
  auto dv = observer_first_derivs(m, x);
  auto gamma = christoffel_from(k.ginv, dg);

  // covd[b][c] = nabla_b V^c
  Mat4<S> covd{};
  for (int b = 0; b < 4; ++b)
    for (int c = 0; c < 4; ++c) {
      S s = dv[b][c];
      for (int d = 0; d < 4; ++d) s = s + gamma[c][b][d] * k.V[d];
      covd[b][c] = s;
    }

  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      S s = S(0.0);
      for (int c = 0; c < 4; ++c) s = s + k.g[a][c] * covd[b][c];
      k.nabla_v[a][b] = s;
    }

  k.theta = S(0.0);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) k.theta = k.theta + k.ginv[a][b] * k.nabla_v[a][b];

  for (int a = 0; a < 4; ++a) {
    S s = S(0.0);
    for (int b = 0; b < 4; ++b) s = s + k.V[b] * covd[b][a];
    k.accel_up[a] = s;
  }
  k.accel = lower_index(k.g, k.accel_up);

  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) k.proj[a][b] = k.g[a][b] + k.u[a] * k.u[b];

  Mat4<S> sym_b = sym2(k.nabla_v);
  Mat4<S> asym_b = antisym2(k.nabla_v);
  Mat4<S> av = vee(k.accel, k.u);
  Mat4<S> aw = wedge(k.accel, k.u);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      k.sigma[a][b] = sym_b[a][b] + 0.5 * av[a][b] - (k.theta / 3.0) * k.proj[a][b];
      k.omega[a][b] = asym_b[a][b] + 0.5 * aw[a][b];
    }

  for (int a = 0; a < 4; ++a) k.rho[a] = k.accel[a] - (k.theta / 3.0) * k.u[a];
  return k;
}

}  // namespace detail

// Kinematical invariants of the observer field at one event, with the
// diagnostics gathered while assembling them. Residuals are raw numbers;
// thresholding is the caller's business.
struct KinematicsSample {
  Vec4d point{};
  Mat4d g{}, g_inv{};
  Mat4d nabla_v{};
  double theta = 0.0;
  Mat4d shear{}, rotation{}, projector{};
  TangentVector accel{};  // upper components
  Vec4d accel_form{};
  Vec4d u{};
  Vec4d rho{};
  Mat4d d_rho{};  // (d rho)_ab = d_a rho_b - d_b rho_a

  double shear_norm = 0.0;     // sqrt|sigma_ab sigma^ab|
  double rotation_norm = 0.0;  // sqrt|omega_ab omega^ab|
  double drho_norm = 0.0;
  double accel_norm2 = 0.0;    // g(nabla_V V, nabla_V V)

  struct Residuals {
    double decomposition = 0.0;
    double perp_shear = 0.0;
    double perp_rotation = 0.0;
    double perp_projector = 0.0;
    double trace_projector = 0.0;
    double accel_orthogonality = 0.0;
    double normalization = 0.0;
    double lie_metric = 0.0;
  } residuals;
};

// B_ab = g_ac (d_b V^c + Gamma^c_{bd} V^d)
Mat4d nabla_V(const MetricModel& model, const Vec4d& p);

KinematicsSample kinematics_at(const MetricModel& model, const Vec4d& p,
                               const Tolerances& tol = {});

// Max-abs entry of B minus the reassembled (theta/3) h + sigma + omega - A (x) u.
double decomposition_residual(const KinematicsSample& sample);

// First-principles Lie derivative of g along V against 2 sym(B).
double lie_V_metric_residual(const MetricModel& model, const Vec4d& p);

// Residuals of the two integrability conditions that hold on conformally
// stationary models: L_V omega = (theta/6) omega and
// L_V A = (1/3) h(dTheta - (theta/2) A). Lie derivatives via Cartan's formula
// with dual-number exterior derivatives. Meaningful as a theorem check only
// once stationarity has been certified; computable anywhere.
struct IntegrabilityResiduals {
  double rotation = 0.0;
  double acceleration = 0.0;
};
IntegrabilityResiduals integrability_check(const MetricModel& model, const Vec4d& p);

// |Theta| * ||omega|| with explicit precondition reporting: the product is
// asserted to vanish only for accel-free certified-stationary congruences.
struct ExclusionResult {
  enum class Status { ok, precondition_violated };
  Status status = Status::ok;
  double product = 0.0;
  double theta = 0.0;
  double rotation_norm = 0.0;
  double accel_norm = 0.0;
};
ExclusionResult expansion_rotation_exclusion(const MetricModel& model, const Vec4d& p,
                                             bool certified_stationary,
                                             const Tolerances& tol = {});

}  // namespace confstat
