#pragma once

#include "confstat/conformal.hpp"
#include "confstat/ode.hpp"

namespace confstat {

// A future-pointing null geodesic in [0,1]-parametrization: trajectory nodes
// with tangents and per-node conservation telemetry. Node data supports cubic
// Hermite evaluation anywhere in [0,1].
struct LightSignal {
  std::vector<double> s;
  std::vector<Vec4d> x;
  std::vector<Vec4d> k;
  std::vector<Vec4d> dk;  // dK/ds at the nodes
  std::vector<double> null_norm;
  std::vector<double> hamiltonian;
  std::vector<double> frequency;  // |g(V,K)| at the nodes
  double kscale2 = 1.0;           // reference scale for relative drifts

  Vec4d x_at(double s) const;
  Vec4d k_at(double s) const;
  double max_null_drift() const;         // max |g(K,K)| / kscale2
  double max_hamiltonian_drift() const;  // max |H| / kscale2
  LightSignal reversed() const;          // swap emission and reception
};

// Project the time component of k0_guess onto the null cone, keeping the
// spatial part; the root is chosen future pointing (g(K,V) < 0) or past
// pointing on request.
Vec4d null_project(const MetricModel& model, const Vec4d& p, const Vec4d& k0_guess,
                   bool future = true);

// Affine integration of dx/ds = K, nabla_K K = 0 over [0, affine_span], then
// rescaled to [0,1]. K is never renormalized mid-flight; a null-norm breach
// beyond the telemetry budget aborts with diagnostics.
LightSignal integrate_null_geodesic(const MetricModel& model, const Vec4d& x0,
                                    const Vec4d& k0_guess, double affine_span,
                                    const Tolerances& tol = {});

// Worst relative drift of the conserved quantity g(xi, K) along the signal.
double conformal_frequency_drift(const MetricModel& model, const LightSignal& signal,
                                 const ConformalCandidate& candidate);

// max |H| over the nodes, H = (1/2) g^{ab} k_a k_b with k the lowered tangent.
double hamiltonian_check(const MetricModel& model, const LightSignal& signal);

struct RedshiftRecord {
  double r_integral = 0.0;   // -int g(nabla_K V, K)/g(V,K) ds
  double r_endpoint = 0.0;   // ln of the frequency ratio from endpoint data
  double r_potential = 0.0;  // from ln f at the endpoints (NaN without candidate)
  double z = 0.0;            // exp(r_integral) - 1
  double consistency = 0.0;  // |r_integral - r_potential|
  bool has_potential = false;
};

RedshiftRecord redshift(const MetricModel& model, const LightSignal& signal,
                        const ConformalCandidate* candidate = nullptr,
                        const Tolerances& tol = {});

// Observer worldline: integral curve of V through a seed event, proper-time
// parametrized on [tau_min, tau_max] (the seed sits at tau = 0).
class ObserverWorldline {
 public:
  ObserverWorldline(const MetricModel& model, const Vec4d& seed, double tau_min, double tau_max,
                    const Tolerances& tol = {});
  Vec4d at(double tau) const;
  double tau_min() const { return tau_min_; }
  double tau_max() const { return tau_max_; }
  const Vec4d& seed() const { return seed_; }

 private:
  Vec4d seed_{};
  double tau_min_, tau_max_;
  DenseSolution fwd_, bwd_;
};

enum class ShootDirection { future, past };

struct ConnectionResult {
  LightSignal signal;   // always future pointing, lambda(0) = emission
  double arrival_tau = 0.0;  // worldline parameter actually hit
  double miss = 0.0;         // final spatial miss at closest approach
  int iterations = 0;
};

// Two-point problem: shoot over initial null directions (plus range along the
// ray) with Newton iteration on the spatial miss at closest approach to the
// worldline. direction = future finds a signal emitted at `event` reaching
// the worldline; direction = past finds a signal received at `event` emitted
// from the worldline.
ConnectionResult connect_observers(const MetricModel& model, const Vec4d& event,
                                   const ObserverWorldline& worldline,
                                   ShootDirection direction = ShootDirection::future,
                                   const Tolerances& tol = {});

// Jacobi field along a signal satisfying the infinitesimal-message conditions:
// Jacobi equation, g(K, nabla_K J) = 0, J(0) = V, J(1) || V. Solved by linear
// superposition of five fundamental solutions; a singular system is the
// conjugate-point diagnostic.
struct MessageSolution {
  std::vector<double> s;
  std::vector<Vec4d> x;
  std::vector<Vec4d> k;
  std::vector<Vec4d> jacobi;       // J
  std::vector<Vec4d> jacobi_der;   // nabla_K J
  std::vector<double> v;           // g(K,J)/g(K,V)
  std::vector<double> parallax_residual;  // ||screen projection of J - v V||
  std::vector<double> conserved;   // g(K, nabla_K J)

  double c = 0.0;                   // J(1) = c V(1)
  double endpoint_residual = 0.0;   // ||J(1) - c V(1)||
  double max_parallax_residual = 0.0;
  double conserved_drift = 0.0;     // max |g(K, nabla_K J)| scaled by |g(K,V)(0)|
  double message_cvf_drift = 0.0;   // max |v g(V,K) - v g(V,K)(0)| (same scaling)
  double v_min = 0.0;
};

MessageSolution solve_infinitesimal_message(const MetricModel& model, const LightSignal& signal,
                                            const Tolerances& tol = {});

// Celestial-sphere drift test: one receiver and two sources, messages solved
// at several reception times over a proper-time window.
struct ParallaxProbe {
  Vec4d receiver_seed{};
  Vec4d source1_seed{};
  Vec4d source2_seed{};
  double window = 1.0;
  int samples = 5;
  double lookback = 3.0;  // how far back source worldlines are integrated
};

struct ParallaxSampleRow {
  double tau = 0.0;
  double cos_angle = 0.0;
  double parallax_residual = 0.0;  // worse of the two messages
  double conserved_drift = 0.0;
  double v_min = 0.0;
};

struct ParallaxReport {
  std::vector<ParallaxSampleRow> rows;
  double angle_drift = 0.0;
  double max_parallax_residual = 0.0;
  double max_conserved_drift = 0.0;
  double v_min = 0.0;
};

ParallaxReport parallax_verdict(const MetricModel& model, const ParallaxProbe& probe,
                                const Tolerances& tol = {});

}  // namespace confstat
