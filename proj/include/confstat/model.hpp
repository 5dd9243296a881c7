#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "confstat/dual.hpp"
#include "confstat/errors.hpp"
#include "confstat/linalg.hpp"

namespace confstat {

// Coordinate box forming the chart domain. Axis names are fixed to t,x,y,z
// for every shipped chart.
struct Box {
  Vec4d lo{};
  Vec4d hi{};

  bool contains(const Vec4d& p, double margin = 0.0) const {
    for (int a = 0; a < 4; ++a)
      if (!(p[a] >= lo[a] - margin && p[a] <= hi[a] + margin)) return false;
    return true;
  }
  Vec4d center() const {
    return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2]),
            0.5 * (lo[3] + hi[3])};
  }
};

inline const char* axis_name(int a) {
  static const char* names[4] = {"t", "x", "y", "z"};
  return names[a];
}

// Documented analytic expectations carried by each shipped family; used as
// test fixtures, never in production paths. A release-gate test recomputes
// them against the finite-difference oracle.
struct ModelExpectations {
  std::function<double(const Vec4d&)> theta;  // expansion, if known in closed form
  std::function<double(const Vec4d&)> ln_f;   // connecting-function log, up to a constant
  bool shear_zero = false;
  bool rotation_zero = false;
  bool accel_zero = false;
  bool conformally_stationary = false;
};

// A world model: chart domain, metric components g_ab(x) and the observer
// field V^a(x), both evaluable on nested dual numbers. The component
// functions are type-erased at the three scalar depths the toolkit needs
// (double for values, one dual level for first derivatives, two for second).
class MetricModel {
 public:
  template <class GF, class VF>
  MetricModel(std::string family, std::map<std::string, double> params, std::string congruence,
              Box domain, GF gfun, VF vfun, ModelExpectations expect = {})
      : family_(std::move(family)),
        params_(std::move(params)),
        congruence_(std::move(congruence)),
        domain_(domain),
        expect_(std::move(expect)),
        g0_([gfun](const Vec4<double>& x) { return gfun(x); }),
        g1_([gfun](const Vec4<D1>& x) { return gfun(x); }),
        g2_([gfun](const Vec4<D2>& x) { return gfun(x); }),
        v0_([vfun](const Vec4<double>& x) { return vfun(x); }),
        v1_([vfun](const Vec4<D1>& x) { return vfun(x); }),
        v2_([vfun](const Vec4<D2>& x) { return vfun(x); }) {}

  template <class S>
  Mat4<S> metric(const Vec4<S>& x) const {
    if constexpr (std::is_same_v<S, double>)
      return g0_(x);
    else if constexpr (std::is_same_v<S, D1>)
      return g1_(x);
    else
      return g2_(x);
  }

  template <class S>
  Vec4<S> observer(const Vec4<S>& x) const {
    if constexpr (std::is_same_v<S, double>)
      return v0_(x);
    else if constexpr (std::is_same_v<S, D1>)
      return v1_(x);
    else
      return v2_(x);
  }

  const std::string& family() const { return family_; }
  const std::map<std::string, double>& params() const { return params_; }
  const std::string& congruence() const { return congruence_; }
  const Box& domain() const { return domain_; }
  const ModelExpectations& expectations() const { return expect_; }

  void require_inside(const Vec4d& p, double margin = 1e-12) const {
    if (!domain_.contains(p, margin)) {
      std::string msg = "point outside chart domain: (";
      for (int a = 0; a < 4; ++a)
        msg += std::to_string(p[a]) + (a < 3 ? ", " : ")");
      throw DomainError(msg);
    }
  }

 private:
  std::string family_;
  std::map<std::string, double> params_;
  std::string congruence_;
  Box domain_;
  ModelExpectations expect_;

  std::function<Mat4<double>(const Vec4<double>&)> g0_;
  std::function<Mat4<D1>(const Vec4<D1>&)> g1_;
  std::function<Mat4<D2>(const Vec4<D2>&)> g2_;
  std::function<Vec4<double>(const Vec4<double>&)> v0_;
  std::function<Vec4<D1>(const Vec4<D1>&)> v1_;
  std::function<Vec4<D2>(const Vec4<D2>&)> v2_;
};

// Signature/normalization scan run on every newly registered model.
void validate_model(const MetricModel& model, int points_per_axis = 3);

// Built-in families: minkowski_static, minkowski_boosted (congruences
// "accelerated" and "rotating"), flrw_flat (params H or p), bianchi_I
// (params p1,p2,p3), goedel (param Omega).
MetricModel instantiate(const std::string& family,
                        const std::map<std::string, double>& params = {},
                        const std::string& congruence = "default");

std::vector<std::string> model_families();

// Registration point for user-supplied models; runs the same validation scan
// the built-ins get and rejects signature or normalization violations.
template <class GF, class VF>
MetricModel register_custom(const std::string& name, const Box& domain, GF gfun, VF vfun,
                            ModelExpectations expect = {}) {
  MetricModel m(name, {}, "custom", domain, std::move(gfun), std::move(vfun), std::move(expect));
  validate_model(m);
  return m;
}

}  // namespace confstat
