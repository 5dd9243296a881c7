#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "confstat/dual.hpp"

namespace confstat {

template <class S>
using Vec4 = std::array<S, 4>;
template <class S>
using Mat4 = std::array<std::array<S, 4>, 4>;

using Vec4d = Vec4<double>;
using Mat4d = Mat4<double>;

template <class S>
Mat4<S> zero_mat4() {
  Mat4<S> m{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m[a][b] = S(0.0);
  return m;
}

template <class S>
Vec4<S> zero_vec4() {
  Vec4<S> v{};
  for (int a = 0; a < 4; ++a) v[a] = S(0.0);
  return v;
}

template <class S>
Mat4<S> diag4(const S& a, const S& b, const S& c, const S& d) {
  Mat4<S> m = zero_mat4<S>();
  m[0][0] = a;
  m[1][1] = b;
  m[2][2] = c;
  m[3][3] = d;
  return m;
}

// g_ab X^a Y^b
template <class S>
S contract(const Mat4<S>& g, const Vec4<S>& x, const Vec4<S>& y) {
  S r = S(0.0);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) r = r + g[a][b] * x[a] * y[b];
  return r;
}

// a_b X^b
template <class S>
S pair(const Vec4<S>& form, const Vec4<S>& x) {
  S r = S(0.0);
  for (int a = 0; a < 4; ++a) r = r + form[a] * x[a];
  return r;
}

template <class S>
Vec4<S> lower_index(const Mat4<S>& g, const Vec4<S>& x) {
  Vec4<S> r = zero_vec4<S>();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) r[a] = r[a] + g[a][b] * x[b];
  return r;
}

template <class S>
Vec4<S> raise_index(const Mat4<S>& ginv, const Vec4<S>& form) {
  return lower_index(ginv, form);
}

// Determinant by cofactor expansion over 2x2 minors; branch-free, so it is
// safe to evaluate on dual numbers.
template <class S>
S det4(const Mat4<S>& m) {
  S s0 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  S s1 = m[0][0] * m[1][2] - m[0][2] * m[1][0];
  S s2 = m[0][0] * m[1][3] - m[0][3] * m[1][0];
  S s3 = m[0][1] * m[1][2] - m[0][2] * m[1][1];
  S s4 = m[0][1] * m[1][3] - m[0][3] * m[1][1];
  S s5 = m[0][2] * m[1][3] - m[0][3] * m[1][2];

  S c5 = m[2][2] * m[3][3] - m[2][3] * m[3][2];
  S c4 = m[2][1] * m[3][3] - m[2][3] * m[3][1];
  S c3 = m[2][1] * m[3][2] - m[2][2] * m[3][1];
  S c2 = m[2][0] * m[3][3] - m[2][3] * m[3][0];
  S c1 = m[2][0] * m[3][2] - m[2][2] * m[3][0];
  S c0 = m[2][0] * m[3][1] - m[2][1] * m[3][0];

  return s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0;
}

// Inverse via the adjugate. Sizes are fixed at 4, so the closed form beats any
// factorization and works on dual scalars.
template <class S>
Mat4<S> inverse4(const Mat4<S>& m, const S& det) {
  S s0 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  S s1 = m[0][0] * m[1][2] - m[0][2] * m[1][0];
  S s2 = m[0][0] * m[1][3] - m[0][3] * m[1][0];
  S s3 = m[0][1] * m[1][2] - m[0][2] * m[1][1];
  S s4 = m[0][1] * m[1][3] - m[0][3] * m[1][1];
  S s5 = m[0][2] * m[1][3] - m[0][3] * m[1][2];

  S c5 = m[2][2] * m[3][3] - m[2][3] * m[3][2];
  S c4 = m[2][1] * m[3][3] - m[2][3] * m[3][1];
  S c3 = m[2][1] * m[3][2] - m[2][2] * m[3][1];
  S c2 = m[2][0] * m[3][3] - m[2][3] * m[3][0];
  S c1 = m[2][0] * m[3][2] - m[2][2] * m[3][0];
  S c0 = m[2][0] * m[3][1] - m[2][1] * m[3][0];

  S inv_det = 1.0 / det;

  Mat4<S> r{};
  r[0][0] = (m[1][1] * c5 - m[1][2] * c4 + m[1][3] * c3) * inv_det;
  r[0][1] = (-m[0][1] * c5 + m[0][2] * c4 - m[0][3] * c3) * inv_det;
  r[0][2] = (m[3][1] * s5 - m[3][2] * s4 + m[3][3] * s3) * inv_det;
  r[0][3] = (-m[2][1] * s5 + m[2][2] * s4 - m[2][3] * s3) * inv_det;

  r[1][0] = (-m[1][0] * c5 + m[1][2] * c2 - m[1][3] * c1) * inv_det;
  r[1][1] = (m[0][0] * c5 - m[0][2] * c2 + m[0][3] * c1) * inv_det;
  r[1][2] = (-m[3][0] * s5 + m[3][2] * s2 - m[3][3] * s1) * inv_det;
  r[1][3] = (m[2][0] * s5 - m[2][2] * s2 + m[2][3] * s1) * inv_det;

  r[2][0] = (m[1][0] * c4 - m[1][1] * c2 + m[1][3] * c0) * inv_det;
  r[2][1] = (-m[0][0] * c4 + m[0][1] * c2 - m[0][3] * c0) * inv_det;
  r[2][2] = (m[3][0] * s4 - m[3][1] * s2 + m[3][3] * s0) * inv_det;
  r[2][3] = (-m[2][0] * s4 + m[2][1] * s2 - m[2][3] * s0) * inv_det;

  r[3][0] = (-m[1][0] * c3 + m[1][1] * c1 - m[1][2] * c0) * inv_det;
  r[3][1] = (m[0][0] * c3 - m[0][1] * c1 + m[0][2] * c0) * inv_det;
  r[3][2] = (-m[3][0] * s3 + m[3][1] * s1 - m[3][2] * s0) * inv_det;
  r[3][3] = (m[2][0] * s3 - m[2][1] * s1 + m[2][2] * s0) * inv_det;
  return r;
}

template <class S>
Mat4<S> inverse4(const Mat4<S>& m) {
  return inverse4(m, det4(m));
}

// Symmetric part with the 1/s! factor: sym(T)_ab = (T_ab + T_ba)/2.
template <class S>
Mat4<S> sym2(const Mat4<S>& t) {
  Mat4<S> r{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) r[a][b] = 0.5 * (t[a][b] + t[b][a]);
  return r;
}

template <class S>
Mat4<S> antisym2(const Mat4<S>& t) {
  Mat4<S> r{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) r[a][b] = 0.5 * (t[a][b] - t[b][a]);
  return r;
}

template <class S>
Mat4<S> outer(const Vec4<S>& x, const Vec4<S>& y) {
  Mat4<S> r{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) r[a][b] = x[a] * y[b];
  return r;
}

// Symmetric/antisymmetric products without the 1/2 factor:
// (x v y)_ab = x_a y_b + y_a x_b,  (x ^ y)_ab = x_a y_b - x_b y_a.
template <class S>
Mat4<S> vee(const Vec4<S>& x, const Vec4<S>& y) {
  Mat4<S> r{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) r[a][b] = x[a] * y[b] + y[a] * x[b];
  return r;
}

template <class S>
Mat4<S> wedge(const Vec4<S>& x, const Vec4<S>& y) {
  Mat4<S> r{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) r[a][b] = x[a] * y[b] - x[b] * y[a];
  return r;
}

inline double max_abs(const Vec4d& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs(const Mat4d& t) {
  double m = 0.0;
  for (const auto& row : t)
    for (double x : row) m = std::max(m, std::abs(x));
  return m;
}

inline Mat4d mat_sub(const Mat4d& a, const Mat4d& b) {
  Mat4d r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i][j] = a[i][j] - b[i][j];
  return r;
}

inline Mat4d mat_add(const Mat4d& a, const Mat4d& b) {
  Mat4d r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i][j] = a[i][j] + b[i][j];
  return r;
}

inline Mat4d mat_scale(double s, const Mat4d& a) {
  Mat4d r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i][j] = s * a[i][j];
  return r;
}

inline Vec4d vec_sub(const Vec4d& a, const Vec4d& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}

inline Vec4d vec_add(const Vec4d& a, const Vec4d& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

inline Vec4d vec_scale(double s, const Vec4d& a) {
  return {s * a[0], s * a[1], s * a[2], s * a[3]};
}

// Invariant size of a (0,2) tensor: sqrt(|T_ab T_cd g^ac g^bd|).
inline double tensor_norm(const Mat4d& t, const Mat4d& ginv) {
  double s = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) s += t[a][b] * t[c][d] * ginv[a][c] * ginv[b][d];
  return std::sqrt(std::abs(s));
}

// Compensated (Kahan) accumulator for order-stable reductions.
class KahanSum {
 public:
  void add(double x) {
    double y = x - comp_;
    double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double total() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Eigenvalue sign count of a symmetric 4x4 matrix by cyclic Jacobi rotations;
// used for the Lorentzian signature check.
inline std::pair<int, int> signature_counts(const Mat4d& sym) {
  Mat4d a = sym;
  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 4; ++p)
      for (int q = p + 1; q < 4; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-26) break;
    for (int p = 0; p < 4; ++p)
      for (int q = p + 1; q < 4; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        double theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < 4; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 4; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  int neg = 0, pos = 0;
  for (int i = 0; i < 4; ++i) (a[i][i] < 0 ? neg : pos)++;
  return {neg, pos};
}

}  // namespace confstat
