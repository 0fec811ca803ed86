#pragma once

// Sharp discontinuity curves in the 2-D reference domain: marker polylines,
// jump sampling by offset interpolation, the interfacial balance residuals,
// and dissipative normal motion.
//
// Orientation conventions: markers of a closed curve run counterclockwise,
// the normal m points outward, and the curvature kappa = tr(L) with
// L = -grad_Sigma m, so a convex inclusion has kappa = -1/R.  The normal
// speed U advects markers by U dt m.

#include <optional>
#include <vector>

#include "qld/constitutive.hpp"
#include "qld/grid.hpp"
#include "qld/surface_energy.hpp"

namespace qld {

struct InterfaceCurve {
  std::vector<Vec3> X;  // marker positions, z = 0
  bool closed = true;
  double ftilde = 1.0;  // kinetic coefficient, > 0
  std::optional<SurfaceEnergyModel> sem;  // absent: unstructured interface
  double targetSpacing = 0.0;

  // derived per marker (update_geometry)
  std::vector<Vec3> tangent;
  std::vector<Vec3> normal;
  std::vector<double> ds;     // arclength weight
  std::vector<double> kappa;  // tr(L), negative for a convex inclusion
  // last evolve results
  std::vector<double> U;
  std::vector<double> G;  // configurational traction fed to the kinetic law

  static InterfaceCurve circle(const Vec3& center, double radius, int nMarkers,
                               double ftilde);
  static InterfaceCurve segment(const Vec3& a, const Vec3& b, int nMarkers,
                                double ftilde);

  std::size_t size() const { return X.size(); }

  /// Tangents/normals/curvature/arclength weights; validates |m| = 1, marker
  /// spacing within [0.5, 2] x target, and non-self-intersection.
  void update_geometry();

  /// Arclength resampling back to the target spacing band.
  void redistribute();
};

/// Nodal bulk fields an interface samples from.  Fill via sample_bulk for a
/// single-model state, or directly for manufactured/multi-phase data.
struct NodalFields {
  std::vector<Mat3> F, gradW, P, S, eshelby;
  std::vector<Vec3> xdot, wdot, w;
  std::vector<double> e;  // energy per unit mass
};

NodalFields sample_bulk(const FieldState& s, const Grid& g,
                        const MaterialModel& m);

struct MarkerJump {
  Vec3 m;       // normal at sampling time
  double U = 0.0;
  // jumps [a] = a+ - a- and averages <a> = (a+ + a-)/2
  Mat3 Fj, Fa, Gj, Ga, Pj, Pa, Sj, Sa, PPj, PPa;
  Vec3 xdj, xda, wdj, wda, wj, wa;
  double ej = 0.0, ea = 0.0;
  // stored products (sampled pointwise, so the product rule is exact)
  Vec3 gwTwd_j, gwTwd_a;  // (grad w)^T wdot
  double wd2_j = 0.0, wd2_a = 0.0;  // |wdot|^2
  double Fm2_j = 0.0, Fm2_a = 0.0;  // |F m|^2
  // projected surface inputs
  Mat3 Fsurf, Nsurf;  // <F> Pi, <grad w> Pi
};

struct JumpSample {
  std::vector<MarkerJump> markers;
  double eps = 0.0;
};

/// a+- by bilinear interpolation at X +- eps m.  Requires eps >= 1.5 h and
/// offset points inside the grid (OffsetOutsideDomain otherwise).
JumpSample sample_jumps(const NodalFields& f, const Grid& g,
                        const InterfaceCurve& c, double eps);

struct CoherenceResidual {
  double tangential;  // ||[F](I - m x m)||
  double kinematic;   // ||[xdot] + U [F] m||
};
std::vector<CoherenceResidual> coherence_residual(const JumpSample& js);

struct InterfacialResidual {
  Vec3 phonon;    // [P]m + Div_S T + rho0 [xdot] U
  Vec3 phason;    // [S]m + Div_S Ss - zs + rhoBar [wdot] U
  double config;  // normal configurational balance (see implementation)
};

/// Surface stresses come from surface_eval when the curve is structured;
/// unstructured curves reduce to the bare jump balances.
std::vector<InterfacialResidual> interfacial_residuals(const JumpSample& js,
                                                       const InterfaceCurve& c,
                                                       double rho0, double rhoBar);

/// Arclength surface divergence of a per-marker tensor field: (dA/ds) t.
std::vector<Vec3> surface_divergence(const InterfaceCurve& c,
                                     const std::vector<Mat3>& A);
/// Scalar counterpart for a vector field: d(a)/ds . t.
std::vector<double> surface_divergence(const InterfaceCurve& c,
                                       const std::vector<Vec3>& a);

/// One dissipative evolution step: solves the per-marker quadratic
///   ftilde U = G + rho0/2 [|Fm|^2] U^2 - rhoBar ([gradW^T wdot].m) U
/// picking the root continuous with the quasi-static branch U = G/ftilde (the
/// smaller-magnitude root, tie-broken toward sign G), advects markers by
/// U dt m, redistributes, and refreshes geometry.  With no bulk sample
/// (js == nullptr) only curvature terms drive the motion.  Throws NoRealRoot
/// (step rejected, curve untouched) when the discriminant is negative.
void evolve_interface(InterfaceCurve& c, const JumpSample* js, double dt,
                      double rho0 = 0.0, double rhoBar = 0.0);

}  // namespace qld
