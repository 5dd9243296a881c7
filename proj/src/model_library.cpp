#include "confstat/model.hpp"

#include <cmath>
#include <sstream>

namespace confstat {

namespace {

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    std::initializer_list<const char*> known, const std::string& family) {
  for (const auto& [k, v] : params) {
    bool ok = false;
    for (const char* name : known)
      if (k == name) ok = true;
    if (!ok) throw ConfigError("unknown parameter '" + k + "' for model family " + family);
  }
}

std::string fmt_event(const Vec4d& p) {
  std::ostringstream os;
  os << "(" << p[0] << ", " << p[1] << ", " << p[2] << ", " << p[3] << ")";
  return os.str();
}

MetricModel make_minkowski_static() {
  auto g = []<class S>(const Vec4<S>& /*x*/) {
    return diag4<S>(S(-1.0), S(1.0), S(1.0), S(1.0));
  };
  auto v = []<class S>(const Vec4<S>& /*x*/) {
    Vec4<S> u = zero_vec4<S>();
    u[0] = S(1.0);
    return u;
  };
  ModelExpectations e;
  e.theta = [](const Vec4d&) { return 0.0; };
  e.ln_f = [](const Vec4d&) { return 0.0; };
  e.shear_zero = e.rotation_zero = e.accel_zero = true;
  e.conformally_stationary = true;
  Box box{{-10, -10, -10, -10}, {10, 10, 10, 10}};
  return MetricModel("minkowski_static", {}, "static", box, g, v, e);
}

// Flat metric with the normalized boost Killing congruence
// V = (x d_t + t d_x)/sqrt(x^2 - t^2); geodesics of V are not geodesics of g,
// so this is the nonzero-acceleration fixture. Domain keeps x > |t|.
MetricModel make_minkowski_accelerated() {
  auto g = []<class S>(const Vec4<S>& /*x*/) {
    return diag4<S>(S(-1.0), S(1.0), S(1.0), S(1.0));
  };
  auto v = []<class S>(const Vec4<S>& x) {
    S w = sqrt(x[1] * x[1] - x[0] * x[0]);
    Vec4<S> u = zero_vec4<S>();
    u[0] = x[1] / w;
    u[1] = x[0] / w;
    return u;
  };
  ModelExpectations e;
  e.theta = [](const Vec4d&) { return 0.0; };
  e.ln_f = [](const Vec4d& p) { return 0.5 * std::log(p[1] * p[1] - p[0] * p[0]); };
  e.shear_zero = e.rotation_zero = true;
  e.accel_zero = false;
  e.conformally_stationary = true;
  Box box{{-0.4, 0.6, -1, -1}, {0.4, 3.0, 1, 1}};
  return MetricModel("minkowski_boosted", {}, "accelerated", box, g, v, e);
}

// Flat metric with the rigidly rotating congruence
// V = (d_t + omega (x d_y - y d_x))/sqrt(1 - omega^2 (x^2+y^2)); rotation and
// acceleration both nonzero, still a Killing congruence.
MetricModel make_minkowski_rotating(double omega) {
  if (!(omega > 0.0))
    throw ConfigError("minkowski_boosted rotating congruence requires omega > 0");
  auto g = []<class S>(const Vec4<S>& /*x*/) {
    return diag4<S>(S(-1.0), S(1.0), S(1.0), S(1.0));
  };
  auto v = [omega]<class S>(const Vec4<S>& x) {
    S r2 = x[1] * x[1] + x[2] * x[2];
    S w = sqrt(1.0 - omega * omega * r2);
    Vec4<S> u = zero_vec4<S>();
    u[0] = 1.0 / w;
    u[1] = -omega * x[2] / w;
    u[2] = omega * x[1] / w;
    return u;
  };
  ModelExpectations e;
  e.theta = [](const Vec4d&) { return 0.0; };
  e.ln_f = [omega](const Vec4d& p) {
    return 0.5 * std::log(1.0 - omega * omega * (p[1] * p[1] + p[2] * p[2]));
  };
  e.shear_zero = true;
  e.rotation_zero = false;
  e.accel_zero = false;
  e.conformally_stationary = true;
  double half = 0.45 / omega;
  Box box{{-2, -half, -half, -2}, {2, half, half, 2}};
  return MetricModel("minkowski_boosted", {{"omega", omega}}, "rotating", box, g, v, e);
}

MetricModel make_flrw(const std::map<std::string, double>& params) {
  reject_unknown(params, {"H", "p"}, "flrw_flat");
  bool power = params.count("p") > 0;
  if (power && params.count("H"))
    throw ConfigError("flrw_flat takes either H (exponential) or p (power law), not both");

  auto v = []<class S>(const Vec4<S>& /*x*/) {
    Vec4<S> u = zero_vec4<S>();
    u[0] = S(1.0);
    return u;
  };

  if (power) {
    double p = params.at("p");
    if (!(p > 0.0)) throw ConfigError("flrw_flat power-law exponent p must be > 0");
    auto g = [p]<class S>(const Vec4<S>& x) {
      S a2 = pow(x[0], 2.0 * p);
      return diag4<S>(S(-1.0), a2, a2, a2);
    };
    ModelExpectations e;
    e.theta = [p](const Vec4d& q) { return 3.0 * p / q[0]; };
    e.ln_f = [p](const Vec4d& q) { return p * std::log(q[0]); };
    e.shear_zero = e.rotation_zero = e.accel_zero = true;
    e.conformally_stationary = true;
    Box box{{0.2, -5, -5, -5}, {8.0, 5, 5, 5}};
    return MetricModel("flrw_flat", {{"p", p}}, "comoving", box, g, v, e);
  }

  double H = get_param(params, "H", 0.1);
  if (!(H > 0.0)) throw ConfigError("flrw_flat expansion rate H must be > 0");
  auto g = [H]<class S>(const Vec4<S>& x) {
    S a = exp(H * x[0]);
    S a2 = a * a;
    return diag4<S>(S(-1.0), a2, a2, a2);
  };
  ModelExpectations e;
  e.theta = [H](const Vec4d&) { return 3.0 * H; };
  e.ln_f = [H](const Vec4d& q) { return H * q[0]; };
  e.shear_zero = e.rotation_zero = e.accel_zero = true;
  e.conformally_stationary = true;
  Box box{{-4.0, -5, -5, -5}, {4.0, 5, 5, 5}};
  return MetricModel("flrw_flat", {{"H", H}}, "comoving", box, g, v, e);
}

// Axisymmetric anisotropic expansion: g = diag(-1, e^{2 p1 t}, e^{2 p2 t},
// e^{2 p3 t}). Unequal rates give the nonzero-shear counterexample.
MetricModel make_bianchi(const std::map<std::string, double>& params) {
  reject_unknown(params, {"p1", "p2", "p3"}, "bianchi_I");
  double p1 = get_param(params, "p1", 1.0);
  double p2 = get_param(params, "p2", 0.0);
  double p3 = get_param(params, "p3", 0.0);
  auto g = [p1, p2, p3]<class S>(const Vec4<S>& x) {
    return diag4<S>(S(-1.0), exp(2.0 * p1 * x[0]), exp(2.0 * p2 * x[0]), exp(2.0 * p3 * x[0]));
  };
  auto v = []<class S>(const Vec4<S>& /*x*/) {
    Vec4<S> u = zero_vec4<S>();
    u[0] = S(1.0);
    return u;
  };
  bool isotropic = (p1 == p2 && p2 == p3);
  ModelExpectations e;
  e.theta = [p1, p2, p3](const Vec4d&) { return p1 + p2 + p3; };
  e.shear_zero = isotropic;
  e.rotation_zero = e.accel_zero = true;
  e.conformally_stationary = isotropic;
  if (isotropic) e.ln_f = [p1](const Vec4d& q) { return p1 * q[0]; };
  Box box{{-3.0, -5, -5, -5}, {3.0, 5, 5, 5}};
  return MetricModel("bianchi_I", {{"p1", p1}, {"p2", p2}, {"p3", p3}}, "comoving", box, g, v, e);
}

// Rotating stationary dust solution in Cartesian-like chart,
// ds^2 = a^2[-(dt + e^x dy)^2 + dx^2 + e^{2x}/2 dy^2 + dz^2], a^2 = 1/(2 Omega^2).
// The normalized d_t congruence has Theta = 0, sigma = 0, omega != 0, accel = 0.
MetricModel make_goedel(const std::map<std::string, double>& params) {
  reject_unknown(params, {"Omega"}, "goedel");
  double om = get_param(params, "Omega", 1.0);
  if (!(om > 0.0)) throw ConfigError("goedel rotation rate Omega must be > 0");
  double a2 = 1.0 / (2.0 * om * om);
  double a = std::sqrt(a2);
  auto g = [a2]<class S>(const Vec4<S>& x) {
    S ex = exp(x[1]);
    Mat4<S> m = zero_mat4<S>();
    m[0][0] = S(-a2);
    m[0][2] = -a2 * ex;
    m[2][0] = m[0][2];
    m[1][1] = S(a2);
    m[2][2] = -0.5 * a2 * ex * ex;
    m[3][3] = S(a2);
    return m;
  };
  auto v = [a]<class S>(const Vec4<S>& /*x*/) {
    Vec4<S> u = zero_vec4<S>();
    u[0] = S(1.0 / a);
    return u;
  };
  ModelExpectations e;
  e.theta = [](const Vec4d&) { return 0.0; };
  e.ln_f = [](const Vec4d&) { return 0.0; };
  e.shear_zero = true;
  e.rotation_zero = false;
  e.accel_zero = true;
  e.conformally_stationary = true;
  Box box{{-2, -1, -2, -2}, {2, 1, 2, 2}};
  return MetricModel("goedel", {{"Omega", om}}, "stationary", box, g, v, e);
}

}  // namespace

void validate_model(const MetricModel& model, int points_per_axis) {
  const Box& box = model.domain();
  int n = points_per_axis < 2 ? 2 : points_per_axis;
  Vec4d p{};
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2)
        for (int i3 = 0; i3 < n; ++i3) {
          int idx[4] = {i0, i1, i2, i3};
          for (int a = 0; a < 4; ++a)
            p[a] = box.lo[a] + (box.hi[a] - box.lo[a]) * idx[a] / double(n - 1);
          Mat4d g = model.metric(p);
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
              if (!std::isfinite(g[a][b]))
                throw GeometryError("metric not finite at " + fmt_event(p));
          double det = det4(g);
          if (std::abs(det) < 1e-12)
            throw GeometryError("metric degenerate at " + fmt_event(p));
          auto [neg, pos] = signature_counts(g);
          if (neg != 1 || pos != 3)
            throw GeometryError("metric signature is not (-,+,+,+) at " + fmt_event(p));
          Vec4d v = model.observer(p);
          double norm = contract(g, v, v);
          if (std::abs(norm + 1.0) > 1e-8)
            throw GeometryError("observer field not normalized at " + fmt_event(p) +
                                ": g(V,V) = " + std::to_string(norm));
          if (!(v[0] > 0.0))
            throw GeometryError("observer field not future pointing at " + fmt_event(p));
        }
}

MetricModel instantiate(const std::string& family, const std::map<std::string, double>& params,
                        const std::string& congruence) {
  auto check_congruence = [&](std::initializer_list<const char*> allowed) {
    if (congruence == "default") return;
    for (const char* c : allowed)
      if (congruence == c) return;
    throw ConfigError("unknown congruence '" + congruence + "' for model family " + family);
  };

  MetricModel model = [&]() -> MetricModel {
    if (family == "minkowski_static") {
      check_congruence({"static"});
      reject_unknown(params, {}, family);
      return make_minkowski_static();
    }
    if (family == "minkowski_boosted") {
      check_congruence({"accelerated", "rotating"});
      reject_unknown(params, {"omega"}, family);
      if (congruence == "rotating") return make_minkowski_rotating(get_param(params, "omega", 0.5));
      if (params.count("omega") && params.at("omega") > 0.0)
        return make_minkowski_rotating(params.at("omega"));
      return make_minkowski_accelerated();
    }
    if (family == "flrw_flat") {
      check_congruence({"comoving"});
      return make_flrw(params);
    }
    if (family == "bianchi_I") {
      check_congruence({"comoving"});
      return make_bianchi(params);
    }
    if (family == "goedel") {
      check_congruence({"stationary"});
      return make_goedel(params);
    }
    throw ConfigError("unknown model family '" + family + "'");
  }();

  validate_model(model);
  return model;
}

std::vector<std::string> model_families() {
  return {"minkowski_static", "minkowski_boosted", "flrw_flat", "bianchi_I", "goedel"};
}

}  // namespace confstat
