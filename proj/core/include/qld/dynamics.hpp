#pragma once

// Time integration of the coupled phonon-phason balances and static
// equilibrium by energy minimization.
//
// Discretization: staggered flux form.  Stresses are evaluated at cell faces
// from face-averaged gradients; the discrete force field is the exact negative
// gradient of the discrete energy below, so total linear/phason momentum is
// conserved to rounding on periodic grids and velocity-Verlet preserves a
// shadow energy.
//
//   Phi(x, w) = sum_axes sum_faces (V_f/dim) rho0 e(F_f, w_f, gradW_f)
//             + external body potential + boundary wells - traction work

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qld/boundary.hpp"
#include "qld/constitutive.hpp"
#include "qld/grid.hpp"

namespace qld {

enum class Integrator {
  Verlet,
  SplitVerletFriction,
  ExplicitPhasonDiffusion,
  SemiImplicitPhasonDiffusion,
};

struct SimConfig {
  double dt = 0.0;      // 0: derive from the stability bound times cflFraction
  double cfl = 0.5;     // safety factor applied to the stability bound
  double cflFraction = 0.2;  // used only when dt == 0
  double tEnd = 1.0;
  long long maxSteps = -1;
  Integrator integrator = Integrator::Verlet;
  int outputEvery = 0;  // 0: never
};

struct DiagRow {
  double t = 0.0;
  double H = 0.0;
  Vec3 p;         // total linear momentum
  Vec3 mu;        // total phason momentum
  double dissipation = 0.0;  // instantaneous rate
  double maxResidual = 0.0;  // run-dependent; see runner docs
};

/// Append-only, monotone in t.
struct DiagnosticsLog {
  std::vector<DiagRow> rows;
  void append(const DiagRow& r);
};

struct ForceField {
  std::vector<Vec3> fx;  // conservative phonon forces (integrated weak form)
  std::vector<Vec3> fw;  // conservative phason forces
};

/// Discrete energy/force assembly on one grid+model+bc triple.  All larger
/// operations (steps, minimization, stability bounds) are built from it.
class Assembly {
 public:
  Assembly(const Grid& g, const MaterialModel& m, const BoundaryConditions& bc);

  const Grid& grid() const { return *g_; }
  const MaterialModel& model() const { return *m_; }
  const BoundaryConditions& bc() const { return *bc_; }

  /// Discrete potential energy (bulk + body potential + boundary terms).
  double potential_energy(const FieldState& s) const;

  /// Exact negative gradient of potential_energy w.r.t. (x, w).
  void forces(const FieldState& s, ForceField& out) const;

  /// Viscous phason force from Sv = omega grad wdot (flux form) applied to the
  /// given rate field; adds into out.
  void viscous_flux_forces(const std::vector<Vec3>& wdot, std::vector<Vec3>& out) const;

  /// Local self-force part of the assembled phason force: out[n] holds the
  /// face-averaged vol * z at the node, so forces().fw + this = vol * Div S.
  void local_self_force(const FieldState& s, std::vector<Vec3>& out) const;

  /// Instantaneous dissipation rate integral z_v.wdot + Sv:grad wdot >= 0.
  double dissipation_rate(const FieldState& s) const;

  /// Nodal lumped masses (rho0 vol, rhoBar vol) and quadrature weights.
  const std::vector<double>& node_volume() const { return vol_; }

  /// Per-channel Dirichlet masks and data application.
  bool fixed_phonon(std::size_t id) const { return fixedX_[id] != 0; }
  bool fixed_phason(std::size_t id) const { return fixedW_[id] != 0; }
  void apply_dirichlet(FieldState& s) const;

  /// Largest stable dt for the hyperbolic (Verlet) channels.
  double dt_bound_hyperbolic() const;
  /// Largest stable dt for explicit phason diffusion.
  double dt_bound_parabolic() const;

  /// max |fx|/vol and |fw|/vol over free nodes (equilibrium residuals).
  std::pair<double, double> residual_norms(const FieldState& s) const;

  double modulus_scale() const { return modulusScale_; }

 private:
  const Grid* g_;
  const MaterialModel* m_;
  const BoundaryConditions* bc_;
  std::vector<double> vol_;
  std::vector<uint8_t> fixedX_, fixedW_;
  double modulusScale_ = 0.0;
  double hypOmegaMax_ = 0.0;
  double parRateMax_ = 0.0;

  template <typename FaceFn>
  void for_each_face(FaceFn&& fn) const;
  void boundary_terms(const FieldState& s, double* energy, ForceField* f) const;
  void precompute_bounds();
};

/// One velocity-Verlet step of the conservative IIC system.  Throws
/// StabilityViolation if dt exceeds the hyperbolic bound and Error if the
/// model has no phason inertia or carries viscous coefficients.
void step_conservative(FieldState& s, const Assembly& asmb, double dt);

/// Dissipative step.  IQ kinds: explicit (or semi-implicit) phason diffusion
/// plus Verlet phonons.  IIC kinds with cstar > 0: Verlet with a symmetric
/// exact-decay friction split.
void step_dissipative(FieldState& s, const Assembly& asmb, double dt,
                      Integrator integrator);

/// Total energy: kinetic + discrete potential (which already carries body and
/// boundary terms).
double total_energy(const FieldState& s, const Assembly& asmb);

Vec3 total_linear_momentum(const FieldState& s, const Assembly& asmb);
Vec3 total_phason_momentum(const FieldState& s, const Assembly& asmb);

struct MinimizeOptions {
  double tol = 1e-8;       // on max residual / modulus scale
  int maxIterations = 50000;
  bool verbose = false;
};

struct MinimizeResult {
  FieldState state;
  double residualPhonon = 0.0;
  double residualPhason = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Nonlinear conjugate gradient (Polak-Ribiere+) with a secant/backtracking
/// line search on the total potential energy.  Requires at least one Dirichlet
/// constraint or periodic closure per channel so rigid modes are pinned.
MinimizeResult minimize_energy(const Grid& g, const MaterialModel& m,
                               const BoundaryConditions& bc, const FieldState& init,
                               const MinimizeOptions& opt = {});

}  // namespace qld
