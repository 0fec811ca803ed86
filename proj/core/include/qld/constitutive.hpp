#pragma once

// Bulk energy densities and their derivatives.
//
// Energy is stored per unit mass; every stress formula multiplies by rho0
// exactly once, here, so nothing downstream double-counts the density:
//   P  = rho0 d_F e        (first Piola-Kirchhoff; rows spatial, cols referential)
//   S  = rho0 d_gradw e    (phason stress, same index layout)
//   z  = rho0 d_w e        (equilibrium self-force; the sign is fixed so that
//                           rhoBar wdot' = -z + Div S is the discrete phason
//                           balance integrated by the dynamics module)
//   PP = rho0 e I - F^T P - gradW^T S   (configurational/Eshelby stress)
// Viscous parts: zv = cstar * wdot, Sv = omega * grad wdot.

#include <functional>
#include <vector>

#include "qld/grid.hpp"

namespace qld {

enum class ModelKind { IICQuadratic, IQQuadratic, IICStVenant, Custom };

inline bool is_iq(ModelKind k) { return k == ModelKind::IQQuadratic; }

struct MaterialModel {
  ModelKind kind = ModelKind::IICQuadratic;
  double rho0 = 1.0;    // referential mass density
  double rhoBar = 0.0;  // phason inertia coefficient (0 for IQ kinds)

  // Quadratic moduli.  Cph acts on the strain (minor+major symmetrized on
  // construction), Kph on grad w (pair-symmetrized), Rc couples strain with
  // grad w (first pair symmetrized).  Moduli arrive as flattened (i,j,k,l)
  // arrays in scenario files.
  Tensor4 Cph;
  Tensor4 Kph;
  Tensor4 Rc;
  double alpha = 0.0;  // local |w|^2 stiffness; must be 0 for IQ kinds

  // Viscous coefficients: scalar path stores cstarScalar >= 0; a full PSD
  // matrix may be supplied instead (cstarMatrix wins when set).
  double cstarScalar = 0.0;
  bool hasCstarMatrix = false;
  Mat3 cstarMatrix;
  double omega = 0.0;

  // Metric-aware isotropic submode: energy written with gamma-contracted
  // invariants sqrt(det gamma) [ lambda/2 tr(gamma^-1 E)^2 + mu tr((gamma^-1 E)^2)
  // + k1/2 tr(gradW gamma^-1 gradW^T) + alpha/2 |w|^2 ].  At gamma = I this
  // coincides with the isotropic St.Venant tensors; for gamma != I it is the
  // form whose gamma-derivative reproduces the configurational stress.
  bool metricInvariant = false;
  double lambdaIso = 0.0, muIso = 0.0, k1Iso = 0.0;

  // Custom kind: per-unit-mass energy of (F, w, gradW); derivatives fall back
  // to central differences.  Optional state-dependent viscous coefficient.
  std::function<double(const Mat3&, const Vec3&, const Mat3&)> customEnergy;
  std::function<double(const Mat3&, const Vec3&, const Mat3&, const Vec3&,
                       const Mat3&)> customCstar;

  void validate() const;

  /// Smallest eigenvalue of the viscous coefficient (the scalar itself on the
  /// scalar path); the parabolic stability bound scales with it.
  double cstar_min() const;

  /// zv = cstar wdot for the active viscous law.
  Vec3 apply_cstar(const Mat3& F, const Vec3& w, const Mat3& gradW,
                   const Vec3& wdot, const Mat3& gradWdot) const;

  // --- convenience constructors -------------------------------------------

  /// Isotropic linear moduli: lambda/mu phonon, k1 |grad w|^2 phason, alpha.
  static MaterialModel isotropic_quadratic(ModelKind kind, double rho0,
                                           double rhoBar, double lambda,
                                           double mu, double k1, double alpha,
                                           double cstar = 0.0, double omega = 0.0);

  /// Finite-strain isotropic model (Green strain), metric-invariant form.
  static MaterialModel isotropic_stvenant(double rho0, double rhoBar,
                                          double lambda, double mu, double k1,
                                          double alpha, double cstar = 0.0,
                                          double omega = 0.0);

  /// Icosahedral-flavoured preset: two phonon constants (lambda, mu), two
  /// phason constants (k1, k2), one phonon-phason coupling constant.  The
  /// values are a convenience parameterization, not a fitted material.
  static MaterialModel icosahedral(ModelKind kind, double rho0, double rhoBar,
                                   double lambda, double mu, double k1,
                                   double k2, double coupling, double alpha = 0.0,
                                   double cstar = 0.0, double omega = 0.0);
};

/// Moduli helpers (all enforce the stated symmetrizations).
Tensor4 isotropic_phonon_tensor(double lambda, double mu);
Tensor4 phason_tensor_two_constants(double k1, double k2);
Tensor4 coupling_tensor(double r);
void symmetrize_moduli(MaterialModel& m);

struct StressBundle {
  double e = 0.0;  // energy per unit mass
  Mat3 P;
  Mat3 S;
  Vec3 z;          // equilibrium self-force (identically 0 for IQ kinds)
  Mat3 eshelby;    // rho0 e I - F^T P - gradW^T S, from this bundle's entries
  Vec3 zv;         // viscous self-force
  Mat3 Sv;         // viscous phason stress
};

/// Elastic energy density per unit mass.
double energy(const MaterialModel& m, const DeformationPoint& dp, const Vec3& w);

/// Full stress bundle; pass rates to get the viscous parts.
StressBundle stresses(const MaterialModel& m, const DeformationPoint& dp,
                      const Vec3& w, const Vec3& wdot = Vec3{},
                      const Mat3& gradWdot = Mat3{});

/// Spatial (Cauchy) stress from the referential pair: (det F)^-1 P F^T.
Mat3 cauchy_stress(const Mat3& P, const Mat3& F);

/// skw(d_F e F^T + w otimes d_w e + gradW (d_gradw e)^T); vanishes for
/// observer-rotation invariant energies.
Mat3 moment_residual(const MaterialModel& m, const DeformationPoint& dp,
                     const Vec3& w);

struct MetricRelationReport {
  Mat3 residual;   // PP - 2 (d_gamma rho0 e) gamma
  Mat3 skwRaised;  // skw(PP gamma^-1)
};

/// Configurational-stress / metric-derivative relation.  d_gamma e is analytic
/// for the metric-invariant submode and by symmetric central differences
/// otherwise (six perturbation directions).
MetricRelationReport metric_relation_residual(const MaterialModel& m,
                                              const DeformationPoint& dp,
                                              const Vec3& w, const Mat3& gamma);

/// Dissipation density zv . wdot + Sv : gradWdot (>= 0 by construction).
double dissipation_density(const MaterialModel& m, const DeformationPoint& dp,
                           const Vec3& w, const Vec3& wdot, const Mat3& gradWdot);

}  // namespace qld
