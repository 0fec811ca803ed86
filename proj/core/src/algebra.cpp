#include "qld/algebra.hpp"

namespace qld {

std::pair<double, Mat3> det_inv(const Mat3& m) {
  const double d = det(m);
  const double scale = norm(m);
  const double eps = 1e-14 * scale * scale * scale;
  if (std::abs(d) <= eps)
    throw SingularMatrix("matrix is singular to working precision (|det| = " +
                         std::to_string(std::abs(d)) + ")");
  // adjugate / det
  Mat3 inv;
  inv(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  inv(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  inv(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  inv(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  inv(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  inv(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  inv(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  inv(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  inv(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  inv *= 1.0 / d;
  return {d, inv};
}

Vec3 axial(const Mat3& m) {
  const double s = norm(sym(m));
  if (s > 1e-10 * norm(m))
    throw NotSkew("axial() expects a skew matrix; ||sym|| = " + std::to_string(s));
  return {m(2, 1), m(0, 2), m(1, 0)};
}

Mat3 rotation(const Vec3& axis, double angle) {
  const double n = norm(axis);
  const Vec3 u = (n > 0.0) ? axis / n : Vec3{0, 0, 1};
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r = c * Mat3::identity() + s * cross_matrix(u) + (1.0 - c) * outer(u, u);
  return r;
}

}  // namespace qld
