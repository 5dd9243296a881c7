#pragma once

#include <cmath>

namespace confstat {

// Unqualified math calls inside scalar-generic component functions must
// resolve for plain doubles as well as duals.
using std::cos;
using std::cosh;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sinh;
using std::sqrt;

// Forward-mode dual number. Nesting (Dual<Dual<double>>) yields exact second
// derivatives of closed-form expressions, which is how all metric and observer
// component derivatives are produced in production paths.
template <class T>
struct Dual {
  T v{};  // value part
  T d{};  // derivative part

  constexpr Dual() = default;
  constexpr Dual(double x) : v(x), d() {}  // literals promote with zero derivative
  constexpr Dual(const T& value, const T& deriv) : v(value), d(deriv) {}
};

using D1 = Dual<double>;
using D2 = Dual<D1>;

// Collapse a (possibly nested) dual to its underlying value.
inline double value(double x) { return x; }
template <class T>
double value(const Dual<T>& x) { return value(x.v); }

template <class T>
constexpr Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T>
constexpr Dual<T> operator+(const Dual<T>& a) { return a; }

template <class T>
constexpr Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T>
constexpr Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T>
constexpr Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <class T>
constexpr Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T q = a.v / b.v;
  return {q, (a.d - q * b.d) / b.v};
}

template <class T>
constexpr Dual<T> operator+(const Dual<T>& a, double b) { return {a.v + b, a.d}; }
template <class T>
constexpr Dual<T> operator+(double a, const Dual<T>& b) { return {a + b.v, b.d}; }
template <class T>
constexpr Dual<T> operator-(const Dual<T>& a, double b) { return {a.v - b, a.d}; }
template <class T>
constexpr Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.v, -b.d}; }
template <class T>
constexpr Dual<T> operator*(const Dual<T>& a, double b) { return {a.v * b, a.d * b}; }
template <class T>
constexpr Dual<T> operator*(double a, const Dual<T>& b) { return {b.v * a, b.d * a}; }
template <class T>
constexpr Dual<T> operator/(const Dual<T>& a, double b) { return {a.v / b, a.d / b}; }
template <class T>
constexpr Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }

template <class T>
Dual<T> exp(const Dual<T>& x) {
  using std::exp;
  T e = exp(x.v);
  return {e, e * x.d};
}

template <class T>
Dual<T> log(const Dual<T>& x) {
  using std::log;
  return {log(x.v), x.d / x.v};
}

template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  using std::sqrt;
  T r = sqrt(x.v);
  return {r, x.d / (2.0 * r)};
}

template <class T>
Dual<T> pow(const Dual<T>& x, double p) {
  using std::pow;
  return {pow(x.v, p), p * pow(x.v, p - 1.0) * x.d};
}

template <class T>
Dual<T> sin(const Dual<T>& x) {
  using std::cos;
  using std::sin;
  return {sin(x.v), cos(x.v) * x.d};
}

template <class T>
Dual<T> cos(const Dual<T>& x) {
  using std::cos;
  using std::sin;
  return {cos(x.v), -sin(x.v) * x.d};
}

template <class T>
Dual<T> sinh(const Dual<T>& x) {
  using std::cosh;
  using std::sinh;
  return {sinh(x.v), cosh(x.v) * x.d};
}

template <class T>
Dual<T> cosh(const Dual<T>& x) {
  using std::cosh;
  using std::sinh;
  return {cosh(x.v), sinh(x.v) * x.d};
}

}  // namespace confstat
