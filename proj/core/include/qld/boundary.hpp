#pragma once

// Boundary data per active axis, side and channel.  On each bounded side a
// channel carries exactly one condition, so the Dirichlet/flux partition of
// the boundary is disjoint and covering by construction.

#include <array>

#include "qld/grid.hpp"

namespace qld {

enum class BcKind { Dirichlet, Traction, Potential, Periodic };

/// One channel (phonon or phason) on one side.
struct ChannelBc {
  BcKind kind = BcKind::Traction;  // zero traction = natural condition
  // Dirichlet: data(X) = value + affine X  (for phonon this is xbar, and
  // affine = I reproduces the identity placement)
  Vec3 value{};
  Mat3 affine{};
  // Traction: t(X) = value
  // Potential: quadratic well, force = -stiffness (field - (ref + refAffine X))
  double stiffness = 0.0;
  Vec3 ref{};
  Mat3 refAffine{};
};

struct BoundaryConditions {
  // [axis][side][channel]; channel 0 = phonon, 1 = phason
  std::array<std::array<std::array<ChannelBc, 2>, 2>, 2> side{};
  Vec3 bodyForce{};  // constant b; external potential per unit mass is -b.x

  static BoundaryConditions periodic_all(const Grid& g);
  static BoundaryConditions natural_all(const Grid& g);

  const ChannelBc& at(int axis, int s, int channel) const {
    return side[axis][s][channel];
  }
  ChannelBc& at(int axis, int s, int channel) { return side[axis][s][channel]; }

  /// Periodic flags must match the grid; throws Error otherwise.
  void validate(const Grid& g) const;

  bool has_dirichlet(int channel, const Grid& g) const;
};

inline Vec3 dirichlet_value(const ChannelBc& c, const Vec3& X) {
  return c.value + c.affine * X;
}
inline Vec3 potential_ref(const ChannelBc& c, const Vec3& X) {
  return c.ref + c.refAffine * X;
}

}  // namespace qld
