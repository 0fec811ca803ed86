#pragma once

// Surface energy phi(m, Fs, <w>, Ns) for structured discontinuity surfaces and
// the interfacial stresses it generates:
//   T  = -d_Fs phi   surface Piola-Kirchhoff stress
//   Ss = -d_Ns phi   surface microstress
//   zs = +d_w  phi   surface self-force
// plus d_m phi for the surface shear.  phi is extended 0-homogeneously in m
// (inputs are normalized internally), so all five outputs are plain partial
// derivatives checkable by central differences.

#include "qld/algebra.hpp"

namespace qld {

enum class SurfaceKind { Constant, AnisotropicQuadratic };

struct SurfaceEnergyModel {
  SurfaceKind kind = SurfaceKind::Constant;
  double phi0 = 0.0;

  // anisotropic_quadratic: phi0 (1 + eps (m.d)^2) + kF/2 |Fs Pi|^2
  //                        + kN/2 |Ns Pi|^2 + kW/2 |<w>|^2
  double anisotropyEps = 0.0;
  Vec3 anisotropyAxis{1.0, 0.0, 0.0};
  double kF = 0.0;
  double kN = 0.0;
  double kW = 0.0;

  void validate() const;  // phi >= 0 on the unit sphere of normals
};

struct SurfaceEval {
  double phi = 0.0;
  Mat3 T;        // -d_Fs phi
  Mat3 Ssurf;    // -d_Ns phi
  Vec3 zsurf;    // +d_w phi
  Vec3 dphi_dm;  // d_m phi (tangential by construction)
};

/// Throws NonUnitNormal unless | |m| - 1 | <= 1e-3 (loose so finite-difference
/// probes of the m-dependence stay legal).
SurfaceEval surface_eval(const SurfaceEnergyModel& sem, const Vec3& m,
                         const Mat3& Fs, const Vec3& wAvg, const Mat3& Ns);

}  // namespace qld
