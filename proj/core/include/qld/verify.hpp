#pragma once

// Numerical certification of the conservation structure: Noether current
// residuals for observer changes and relabelings, rotation-invariance probes,
// the universal-affine-deformation determinant condition, and integral power
// invariance over parts.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qld/boundary.hpp"
#include "qld/constitutive.hpp"
#include "qld/grid.hpp"

namespace qld {

enum class GeneratorKind {
  SpatialTranslation,
  SpatialRotation,
  PhasonTranslation,
  PhasonRotation,
  Relabeling,
};

/// Triple (v-field, xi-action, w-field) parameterizing a change of observer or
/// a relabeling of the reference body.
struct SymmetryGenerator {
  GeneratorKind kind = GeneratorKind::SpatialTranslation;
  Vec3 value{};             // translation vector or rotation rate
  Vec3 pivot{};             // rotation pivot
  std::vector<Vec3> wfield; // relabeling velocity, one entry per node

  static SymmetryGenerator spatial_translation(const Vec3& c);
  static SymmetryGenerator spatial_rotation(const Vec3& qdot, const Vec3& x0);
  static SymmetryGenerator phason_translation(const Vec3& c);
  static SymmetryGenerator phason_rotation(const Vec3& qdot);
  /// Relabeling field as the discrete curl of a nodal potential (z-component),
  /// divergence-free to rounding on the grid stencils.
  static SymmetryGenerator relabeling(const Grid& g,
                                      const std::function<double(const Vec3&)>& psi);
  /// Relabeling rotation w = qdot ^ (X - X0) (isocoric, exact for the stencils).
  static SymmetryGenerator relabeling_rotation(const Grid& g, double qdotZ,
                                               const Vec3& X0);

  Vec3 v(const Vec3& x) const;        // spatial observer velocity at x
  Vec3 xi(const Vec3& w) const;       // action on the phason space
  Vec3 wf(std::size_t node) const;    // relabeling field at a node
  bool has_wfield() const { return kind == GeneratorKind::Relabeling; }

  /// max |discrete Div wfield| (zero to rounding by construction).
  double discrete_divergence_max(const Grid& g) const;
};

struct NoetherDensities {
  std::vector<double> Q;  // scalar density per node
  std::vector<Vec3> Fcur; // current per node
};

/// Q = d_xdot L . (v - F w) + d_wdot L . (xi(w) - gradW w)
/// F = L w - P^T (v - F w) - S^T (xi(w) - gradW w)
NoetherDensities noether_densities(const FieldState& s, const Grid& g,
                                   const MaterialModel& m,
                                   const SymmetryGenerator& gen);

struct ConservationReport {
  std::string generator;
  std::vector<double> charge;       // integral of Q per frame
  double maxChargeStep = 0.0;       // max per-step change of the charge
  double chargeScale = 0.0;         // normalization for the step drift
  double maxPointwise = 0.0;        // max |Qdot + Div F| on interior nodes
  double orderEstimate = 0.0;       // filled by refinement drivers, else 0
};

/// Midpoint-staggered residual over a uniformly spaced trajectory.  For the
/// translation kinds the flux divergence is the solver's own force assembly,
/// which makes the residual exact to rounding (up to local self-force
/// sources); other kinds use the nodal central-difference divergence.
ConservationReport conservation_residual(const std::vector<FieldState>& traj,
                                         double dt, const Grid& g,
                                         const MaterialModel& m,
                                         const BoundaryConditions& bc,
                                         const SymmetryGenerator& gen);

struct InvarianceReport {
  double maxEnergyResidual = 0.0;   // relative, over sampled rotations
  double maxMomentResidual = 0.0;   // relative, matching moment_residual
  double nonconvexityGap = 0.0;     // e(midpoint) - mean e at a rotation pair
};

/// Samples random rotations acting jointly on (F, w, gradW).
InvarianceReport invariance_probe(const MaterialModel& m, int nSamples,
                                  std::uint64_t seed);

/// max over nodes of |skw(PP gamma^-1-raised)| / |PP| for the current state.
double eshelby_symmetry_residual(const FieldState& s, const Grid& g,
                                 const MaterialModel& m);

struct UniversalAffineResult {
  double det = 0.0;            // determinant of the 18x18 moduli block matrix
  double detNormalized = 0.0;  // relative to the decoupled block determinant
  double affinityResidual = 0.0;  // max interior deviation of (F, gradW)
  int minimizeIterations = 0;
};

/// Assembles d(P,S)/d(F,gradW) by column probing (exact for quadratic kinds),
/// takes the LU determinant, and measures interior affinity of the
/// equilibrium under random affine Dirichlet data on an nCells^2 grid.
UniversalAffineResult universal_affine_check(const MaterialModel& m, int nCells,
                                             std::uint64_t seed,
                                             bool runAffinity = true);

struct PartRange {
  int i0, i1, j0, j1;  // node index ranges, inclusive-exclusive
};

struct PowerInvarianceReport {
  std::vector<double> forceResidual;   // per part
  std::vector<double> momentResidual;  // per part
  double forceScale = 0.0;
  double momentScale = 0.0;
  double maxPointwiseMoment = 0.0;  // |alt(P F^T + S gradW^T) + w ^ z| / scale
};

/// Integral force and moment balances over axis-aligned parts, with inertial
/// terms identified from centered trajectory differences, plus the pointwise
/// rotational identity at the middle frame.
PowerInvarianceReport power_invariance_check(const std::vector<FieldState>& traj,
                                             double dt, const Grid& g,
                                             const MaterialModel& m,
                                             const std::vector<PartRange>& parts,
                                             const Vec3& x0 = Vec3{},
                                             const Vec3& bodyForce = Vec3{});

/// Observed convergence order from errors on successively refined runs.
double refinement_order(const std::vector<double>& errors, double factor = 2.0);

}  // namespace qld
