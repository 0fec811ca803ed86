#pragma once

// Independent oracles used by the test suites.  Everything here is written
// against the raw formulas (index loops, cofactor expansions, plain finite
// differences), never against the library's evaluation path, so a bug in the
// implementation cannot cancel out of the check.

#include <cmath>
#include <functional>
#include <vector>

#include "qld/algebra.hpp"

namespace oracle {

using qld::Mat3;
using qld::Tensor4;
using qld::Vec3;

/// 3x3 determinant by explicit cofactor expansion along the first row.
inline double det_cofactor(const Mat3& m) {
  auto minor2 = [&](int r0, int r1, int c0, int c1) {
    return m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
  };
  return m(0, 0) * minor2(1, 2, 1, 2) - m(0, 1) * minor2(1, 2, 0, 2) +
         m(0, 2) * minor2(1, 2, 0, 1);
}

/// Inverse as adjugate transpose of cofactors over the determinant.
inline Mat3 inverse_adjugate(const Mat3& m) {
  Mat3 cof;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      int r[2], c[2], ri = 0, ci = 0;
      for (int k = 0; k < 3; ++k) {
        if (k != i) r[ri++] = k;
        if (k != j) c[ci++] = k;
      }
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      cof(i, j) = sign * (m(r[0], c[0]) * m(r[1], c[1]) -
                          m(r[0], c[1]) * m(r[1], c[0]));
    }
  Mat3 inv = qld::transpose(cof);
  inv *= 1.0 / det_cofactor(m);
  return inv;
}

/// Quadratic form by a naive quadruple index loop.
inline double quad_form_loops(const Tensor4& t, const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s += a(i, j) * t(i, j, k, l) * b(k, l);
  return s;
}

/// Central finite difference of f with respect to one Mat3 argument.
inline Mat3 fd_matrix(const std::function<double(const Mat3&)>& f, const Mat3& at,
                      double step = 0.0) {
  const double h = (step > 0.0) ? step : 1e-6 * (1.0 + qld::norm(at));
  Mat3 g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Mat3 p = at, m = at;
      p(i, j) += h;
      m(i, j) -= h;
      g(i, j) = (f(p) - f(m)) / (2.0 * h);
    }
  return g;
}

/// Central finite difference with respect to a Vec3 argument.
inline Vec3 fd_vector(const std::function<double(const Vec3&)>& f, const Vec3& at,
                      double step = 0.0) {
  const double h = (step > 0.0) ? step : 1e-6 * (1.0 + qld::norm(at));
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    Vec3 p = at, m = at;
    p[i] += h;
    m[i] -= h;
    g[i] = (f(p) - f(m)) / (2.0 * h);
  }
  return g;
}

/// Observed convergence order from errors at resolutions refining by `factor`.
inline double observed_order(const std::vector<double>& errors, double factor = 2.0) {
  double worst = 1e300;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (errors[i + 1] == 0.0) continue;  // exact at finer level
    worst = std::min(worst, std::log(errors[i] / errors[i + 1]) / std::log(factor));
  }
  return worst;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

}  // namespace oracle
