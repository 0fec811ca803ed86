#include "qld/kinematics.hpp"

#include "qld/errors.hpp"
#include "qld/parallel.hpp"

namespace qld {

void Grid::validate() const {
  if (dim < 1 || dim > 2) throw Error("grid dim must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    if (h[a] <= 0.0) throw Error("grid spacing must be positive");
    if (cells[a] < 4) throw Error("grid needs at least 4 cells per active axis");
  }
}

FieldState FieldState::natural(const Grid& g) {
  FieldState s;
  const std::size_t n = g.node_count();
  s.x.resize(n);
  s.v.assign(n, Vec3{});
  s.w.assign(n, Vec3{});
  s.wv.assign(n, Vec3{});
  for (std::size_t id = 0; id < n; ++id) s.x[id] = g.coord(id);
  return s;
}

Vec3 nodal_derivative(const std::vector<Vec3>& f, const Grid& g, int i, int j,
                      int axis) {
  const int n = g.nodes_along(axis);
  const double inv2h = 1.0 / (2.0 * g.h[axis]);
  const int k = (axis == 0) ? i : j;
  auto at = [&](int kk) -> const Vec3& {
    return (axis == 0) ? f[g.id(kk, j)] : f[g.id(i, kk)];
  };
  if (g.periodic[axis]) {
    const int kp = (k + 1) % n, km = (k + n - 1) % n;
    return (at(kp) - at(km)) * inv2h;
  }
  if (k == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv2h;
  if (k == n - 1) return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) * inv2h;
  return (at(k + 1) - at(k - 1)) * inv2h;
}

std::vector<DeformationPoint> gradients(const FieldState& s, const Grid& g,
                                        const Mat3& gammaRef, const Mat3& gSpatial) {
  const std::size_t n = g.node_count();
  std::vector<DeformationPoint> out(n);
  const int nx = g.nodes_along(0);
  // difference the displacement u = x - X; the placement itself is not a
  // periodic field, u is
  std::vector<Vec3> u(n);
  for (std::size_t id = 0; id < n; ++id) u[id] = s.x[id] - g.coord(id);
  parallel_for(n, [&](std::size_t id) {
    const int i = int(id % nx), j = int(id / nx);
    DeformationPoint dp;
    dp.F = Mat3::identity();
    dp.gradW = Mat3::zero();
    for (int a = 0; a < g.dim; ++a) {
      const Vec3 dua = nodal_derivative(u, g, i, j, a);
      const Vec3 dwa = nodal_derivative(s.w, g, i, j, a);
      for (int r = 0; r < 3; ++r) {
        dp.F(r, a) += dua[r];
        dp.gradW(r, a) = dwa[r];
      }
    }
    dp.gammaRef = gammaRef;
    dp.gSpatial = gSpatial;
    out[id] = dp;
  });
  for (std::size_t id = 0; id < n; ++id)
    if (det(out[id].F) <= 0.0)
      throw OrientationViolation("det F <= 0", id);
  return out;
}

std::vector<DeformationPoint> gradients(const FieldState& s, const Grid& g) {
  return gradients(s, g, Mat3::identity(), Mat3::identity());
}

std::pair<Mat3, Mat3> decompose(const DeformationPoint& dp) {
  const Mat3 Fprime = dp.F + dp.gradW;
  const Mat3 Finv = det_inv(dp.F).second;
  const Mat3 Fph = Mat3::identity() + dp.gradW * Finv;
  return {Fprime, Fph};
}

Mat3 phason_pushforward(const DeformationPoint& dp) {
  return dp.gradW * det_inv(dp.F).second;
}

namespace {

// nodal derivative of a Mat3 field along an active axis (same stencils)
Mat3 mat_derivative(const std::vector<Mat3>& f, const Grid& g, int i, int j,
                    int axis) {
  const int n = g.nodes_along(axis);
  const double inv2h = 1.0 / (2.0 * g.h[axis]);
  const int k = (axis == 0) ? i : j;
  auto at = [&](int kk) -> const Mat3& {
    return (axis == 0) ? f[g.id(kk, j)] : f[g.id(i, kk)];
  };
  if (g.periodic[axis]) {
    const int kp = (k + 1) % n, km = (k + n - 1) % n;
    return (at(kp) - at(km)) * inv2h;
  }
  if (k == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv2h;
  if (k == n - 1) return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) * inv2h;
  return (at(k + 1) - at(k - 1)) * inv2h;
}

std::vector<Mat3> curl_once(const std::vector<Mat3>& field, const Grid& g) {
  static constexpr int eps[3][3][3] = {
      {{0, 0, 0}, {0, 0, 1}, {0, -1, 0}},
      {{0, 0, -1}, {0, 0, 0}, {1, 0, 0}},
      {{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}};
  const std::size_t n = g.node_count();
  const int nx = g.nodes_along(0);
  std::vector<Mat3> out(n);
  for (std::size_t id = 0; id < n; ++id) {
    const int i = int(id % nx), j = int(id / nx);
    Mat3 d[2];
    for (int a = 0; a < g.dim; ++a) d[a] = mat_derivative(field, g, i, j, a);
    Mat3 c;
    for (int r = 0; r < 3; ++r)
      for (int C = 0; C < 3; ++C) {
        double s = 0.0;
        for (int A = 0; A < g.dim; ++A)
          for (int B = 0; B < 3; ++B)
            if (eps[C][A][B] != 0) s += eps[C][A][B] * d[A](r, B);
        c(r, C) = s;
      }
    out[id] = c;
  }
  return out;
}

}  // namespace

std::vector<Mat3> curl_curl(const std::vector<Mat3>& field, const Grid& g) {
  return curl_once(curl_once(field, g), g);
}

std::vector<Mat3> incompatibility(const std::vector<Mat3>& field, const Grid& g) {
  static constexpr int eps[3][3][3] = {
      {{0, 0, 0}, {0, 0, 1}, {0, -1, 0}},
      {{0, 0, -1}, {0, 0, 0}, {1, 0, 0}},
      {{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}};
  const std::size_t n = g.node_count();
  const int nx = g.nodes_along(0);
  // second derivatives D_C D_E of every component, by repeated application of
  // the (commuting) nodal stencils
  std::vector<Mat3> d[2];
  for (int a = 0; a < g.dim; ++a) {
    d[a].resize(n);
    for (std::size_t id = 0; id < n; ++id) {
      const int i = int(id % nx), j = int(id / nx);
      d[a][id] = mat_derivative(field, g, i, j, a);
    }
  }
  std::vector<Mat3> dd[2][2];
  for (int a = 0; a < g.dim; ++a)
    for (int b = 0; b < g.dim; ++b) {
      dd[a][b].resize(n);
      for (std::size_t id = 0; id < n; ++id) {
        const int i = int(id % nx), j = int(id / nx);
        dd[a][b][id] = mat_derivative(d[a], g, i, j, b);
      }
    }
  std::vector<Mat3> out(n);
  for (std::size_t id = 0; id < n; ++id) {
    Mat3 r;
    for (int A = 0; A < 3; ++A)
      for (int B = 0; B < 3; ++B) {
        double sum = 0.0;
        for (int C = 0; C < g.dim; ++C)
          for (int D = 0; D < 3; ++D) {
            if (eps[A][C][D] == 0) continue;
            for (int E = 0; E < g.dim; ++E)
              for (int F = 0; F < 3; ++F) {
                if (eps[B][E][F] == 0) continue;
                sum += eps[A][C][D] * eps[B][E][F] * dd[C][E][id](D, F);
              }
          }
        r(A, B) = sum;
      }
    out[id] = r;
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> compatibility_residual(
    const FieldState& s, const Grid& g) {
  const std::size_t n = g.node_count();
  std::vector<double> ru(n, 0.0), rw(n, 0.0);
  if (g.dim < 2) return {ru, rw};  // all referential curls vanish in 1-D
  const auto dps = gradients(s, g);
  std::vector<Mat3> eps_u(n), grad_w(n);
  for (std::size_t id = 0; id < n; ++id) {
    eps_u[id] = sym(dps[id].F - Mat3::identity());
    grad_w[id] = dps[id].gradW;
  }
  const auto inc_u = incompatibility(eps_u, g);
  const auto inc_w = curl_curl(grad_w, g);
  for (std::size_t id = 0; id < n; ++id) {
    ru[id] = norm(inc_u[id]);
    rw[id] = norm(inc_w[id]);
  }
  return {ru, rw};
}

}  // namespace qld
