#pragma once

// Dense 3-vector / 3x3 / 3x3x3x3 kernels shared by every module.
//
// Index conventions, fixed repo-wide:
//   * Mat3 is row-major; m(i,j) has i = output (row), j = input (column).
//   * Two-point tensors (F, P, S and their face/surface variants) carry the
//     spatial index on rows and the referential index on columns.
//   * Tensor4 is indexed (i,j,k,l) and contracts a Mat3 over its last pair.

#include <array>
#include <cmath>
#include <utility>

#include "qld/errors.hpp"

namespace qld {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return (&x)[i]; }
  double operator[](int i) const { return (&x)[i]; }

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator*(double s, Vec3 a) { return a *= s; }
inline Vec3 operator*(Vec3 a, double s) { return a *= s; }
inline Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }

inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

/// Cross product, built from the alternating symbol.
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

struct Mat3 {
  // rows first
  std::array<double, 9> a{};

  double& operator()(int i, int j) { return a[3 * i + j]; }
  double operator()(int i, int j) const { return a[3 * i + j]; }

  static Mat3 identity() {
    Mat3 m;
    m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
    return m;
  }
  static Mat3 zero() { return Mat3{}; }
  static Mat3 diag(double d0, double d1, double d2) {
    Mat3 m;
    m(0, 0) = d0; m(1, 1) = d1; m(2, 2) = d2;
    return m;
  }

  Mat3& operator+=(const Mat3& o) {
    for (int i = 0; i < 9; ++i) a[i] += o.a[i];
    return *this;
  }
  Mat3& operator-=(const Mat3& o) {
    for (int i = 0; i < 9; ++i) a[i] -= o.a[i];
    return *this;
  }
  Mat3& operator*=(double s) {
    for (int i = 0; i < 9; ++i) a[i] *= s;
    return *this;
  }
};

inline Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
inline Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
inline Mat3 operator*(double s, Mat3 a) { return a *= s; }
inline Mat3 operator*(Mat3 a, double s) { return a *= s; }
inline Mat3 operator-(const Mat3& m) { return -1.0 * m; }

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline Vec3 operator*(const Mat3& m, const Vec3& v) {
  return {m(0, 0) * v.x + m(0, 1) * v.y + m(0, 2) * v.z,
          m(1, 0) * v.x + m(1, 1) * v.y + m(1, 2) * v.z,
          m(2, 0) * v.x + m(2, 1) * v.y + m(2, 2) * v.z};
}

inline Mat3 transpose(const Mat3& m) {
  Mat3 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = m(j, i);
  return t;
}

inline Mat3 outer(const Vec3& a, const Vec3& b) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = a[i] * b[j];
  return m;
}

/// Frobenius inner product a : b.
inline double ddot(const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (int i = 0; i < 9; ++i) s += a.a[i] * b.a[i];
  return s;
}
inline double norm(const Mat3& m) { return std::sqrt(ddot(m, m)); }
inline double trace(const Mat3& m) { return m(0, 0) + m(1, 1) + m(2, 2); }

inline Mat3 sym(const Mat3& m) { return 0.5 * (m + transpose(m)); }

/// Skew part (m - m^T)/2; annihilates symmetric inputs exactly.
inline Mat3 skw(const Mat3& m) { return 0.5 * (m - transpose(m)); }

inline double det(const Mat3& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

/// Determinant and inverse together.  Throws SingularMatrix when
/// |det| <= 1e-14 * ||m||^3 (the cube keeps the threshold unit-consistent).
std::pair<double, Mat3> det_inv(const Mat3& m);

/// Axial vector q of a skew matrix W = q^, i.e. W v = q x v.
/// Asserts ||sym(m)|| <= 1e-10 ||m|| and throws NotSkew otherwise.
Vec3 axial(const Mat3& m);

/// Skew matrix of q: cross_matrix(q) v = q x v.
inline Mat3 cross_matrix(const Vec3& q) {
  Mat3 m;
  m(0, 1) = -q.z; m(0, 2) = q.y;
  m(1, 0) = q.z;  m(1, 2) = -q.x;
  m(2, 0) = -q.y; m(2, 1) = q.x;
  return m;
}

/// vec(M)_i = e_ijk M_kj, so vec(cross_matrix(q)) = 2 q.
inline Vec3 alternate(const Mat3& m) {
  return {m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)};
}

inline bool finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}
inline bool finite(const Mat3& m) {
  for (double c : m.a)
    if (!std::isfinite(c)) return false;
  return true;
}

/// Rotation about unit axis n by angle (Rodrigues).
Mat3 rotation(const Vec3& axis, double angle);

struct Tensor4 {
  std::array<double, 81> a{};

  double& operator()(int i, int j, int k, int l) {
    return a[27 * i + 9 * j + 3 * k + l];
  }
  double operator()(int i, int j, int k, int l) const {
    return a[27 * i + 9 * j + 3 * k + l];
  }

  Tensor4& operator+=(const Tensor4& o) {
    for (int i = 0; i < 81; ++i) a[i] += o.a[i];
    return *this;
  }
  Tensor4& operator*=(double s) {
    for (int i = 0; i < 81; ++i) a[i] *= s;
    return *this;
  }
};

inline Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
inline Tensor4 operator*(double s, Tensor4 t) { return t *= s; }

/// (T : M)_ij = T_ijkl M_kl.
inline Mat3 apply(const Tensor4& t, const Mat3& m) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s += t(i, j, k, l) * m(k, l);
      r(i, j) = s;
    }
  return r;
}

/// Swap index pairs: T'_ijkl = T_klij.
inline Tensor4 transpose_pairs(const Tensor4& t) {
  Tensor4 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) r(i, j, k, l) = t(k, l, i, j);
  return r;
}

inline double norm(const Tensor4& t) {
  double s = 0.0;
  for (double c : t.a) s += c * c;
  return std::sqrt(s);
}

}  // namespace qld
