#pragma once

// Structured reference grid.  1-D and 2-D problems are embedded in 3-component
// fields: inactive displacement components are carried as exact zeros, so all
// tensor formulas run unmodified.

#include <array>
#include <cstddef>
#include <vector>

#include "qld/algebra.hpp"

namespace qld {

struct Grid {
  int dim = 1;                                // active axes (1 or 2)
  std::array<int, 2> cells = {8, 1};          // cells per active axis
  std::array<double, 2> h = {1.0, 1.0};       // spacing per axis
  std::array<bool, 2> periodic = {false, false};
  std::array<double, 2> origin = {0.0, 0.0};

  /// Throws Error unless h > 0 and cells >= 4 on every active axis.
  void validate() const;

  int nodes_along(int axis) const {
    if (axis >= dim) return 1;
    return periodic[axis] ? cells[axis] : cells[axis] + 1;
  }
  std::size_t node_count() const {
    return std::size_t(nodes_along(0)) * std::size_t(nodes_along(1));
  }
  std::size_t id(int i, int j) const {
    return std::size_t(i) + std::size_t(nodes_along(0)) * std::size_t(j);
  }
  std::array<int, 2> ij(std::size_t id) const {
    const int nx = nodes_along(0);
    return {int(id % nx), int(id / nx)};
  }

  double length(int axis) const { return cells[axis] * h[axis]; }
  double volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= length(a);
    return v;
  }

  Vec3 coord(int i, int j) const {
    Vec3 X{origin[0] + i * h[0], 0.0, 0.0};
    if (dim > 1) X.y = origin[1] + j * h[1];
    return X;
  }
  Vec3 coord(std::size_t id) const {
    const auto p = ij(id);
    return coord(p[0], p[1]);
  }

  /// Trapezoid quadrature weight of a node (product over bounded axes).
  double node_weight(int i, int j) const {
    double w = 1.0;
    const std::array<int, 2> idx = {i, j};
    for (int a = 0; a < dim; ++a) {
      double f = h[a];
      if (!periodic[a] && (idx[a] == 0 || idx[a] == nodes_along(a) - 1)) f *= 0.5;
      w *= f;
    }
    return w;
  }

  bool on_boundary(int i, int j, int axis, int side) const {
    if (axis >= dim || periodic[axis]) return false;
    const int k = (axis == 0) ? i : j;
    return side == 0 ? (k == 0) : (k == nodes_along(axis) - 1);
  }
};

/// Discretized motion: placement x, velocity, phason displacement w and its
/// rate, all nodal, plus the current time.
struct FieldState {
  std::vector<Vec3> x;
  std::vector<Vec3> v;
  std::vector<Vec3> w;
  std::vector<Vec3> wv;
  double t = 0.0;

  static FieldState natural(const Grid& g);
  std::size_t size() const { return x.size(); }
};

/// Pointwise deformation data: F = grad x, grad w, and the (constant) metrics.
struct DeformationPoint {
  Mat3 F = Mat3::identity();
  Mat3 gradW;
  Mat3 gammaRef = Mat3::identity();
  Mat3 gSpatial = Mat3::identity();
};

}  // namespace qld
