#include "qld/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "qld/errors.hpp"
#include "qld/io.hpp"
#include "qld/kinematics.hpp"
#include "qld/rng.hpp"
#include "qld/verify.hpp"

namespace qld {

namespace {

std::string outpath(const Scenario& sc, const std::string& name) {
  std::filesystem::create_directories(sc.outputDir);
  return sc.outputDir + "/" + name;
}

std::string snapshot_name(long long step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fields_%06lld.vtk", step);
  return buf;
}

double pick_dt(const Scenario& sc, const Assembly& asmb) {
  if (sc.sim.dt > 0.0) return sc.sim.dt;
  double bound = asmb.dt_bound_hyperbolic();
  if (sc.sim.integrator == Integrator::ExplicitPhasonDiffusion)
    bound = std::min(bound, asmb.dt_bound_parabolic());
  return sc.sim.cflFraction * sc.sim.cfl * bound;
}

}  // namespace

RunReport run_simulate(const Scenario& sc) {
  Assembly asmb(sc.grid, sc.material, sc.bc);
  FieldState s = build_initial_state(sc);
  asmb.apply_dirichlet(s);
  const double dt = pick_dt(sc, asmb);
  const bool conservative = sc.sim.integrator == Integrator::Verlet;

  DiagnosticsWriter diag(outpath(sc, "diagnostics.csv"));
  const double H0 = total_energy(s, asmb);
  double Hprev = H0;
  double worst = 0.0;

  auto record = [&](const FieldState& st) {
    DiagRow r;
    r.t = st.t;
    r.H = total_energy(st, asmb);
    r.p = total_linear_momentum(st, asmb);
    r.mu = total_phason_momentum(st, asmb);
    r.dissipation = asmb.dissipation_rate(st);
    if (conservative)
      worst = std::max(worst, std::abs(r.H - H0) / std::max(1e-300, std::abs(H0)));
    else
      worst = std::max(worst, std::max(0.0, r.H - Hprev) /
                                  std::max(1e-300, std::abs(Hprev)));
    Hprev = r.H;
    r.maxResidual = worst;
    diag.append(r);
  };

  record(s);
  if (sc.sim.outputEvery > 0)
    write_vtk_snapshot(outpath(sc, snapshot_name(0)), sc.grid, s, sc.material);

  long long step = 0;
  while (s.t < sc.sim.tEnd - 0.5 * dt) {
    if (sc.sim.maxSteps >= 0 && step >= sc.sim.maxSteps) break;
    if (conservative)
      step_conservative(s, asmb, dt);
    else
      step_dissipative(s, asmb, dt, sc.sim.integrator);
    ++step;
    if (sc.sim.outputEvery > 0 && step % sc.sim.outputEvery == 0) {
      record(s);
      write_vtk_snapshot(outpath(sc, snapshot_name(step)), sc.grid, s, sc.material);
    }
  }
  record(s);
  write_vtk_snapshot(outpath(sc, "fields_final.vtk"), sc.grid, s, sc.material);

  RunReport rep;
  rep.summary = "simulate: " + std::to_string(step) + " steps to t=" +
                format_double(s.t) + ", monitored defect " + format_double(worst);
  return rep;
}

RunReport run_minimize(const Scenario& sc) {
  MinimizeOptions opt;
  const MinimizeResult res =
      minimize_energy(sc.grid, sc.material, sc.bc, build_initial_state(sc), opt);

  Assembly asmb(sc.grid, sc.material, sc.bc);
  DiagnosticsWriter diag(outpath(sc, "diagnostics.csv"));
  DiagRow r;
  r.t = 0.0;
  r.H = total_energy(res.state, asmb);
  r.p = total_linear_momentum(res.state, asmb);
  r.mu = total_phason_momentum(res.state, asmb);
  r.dissipation = 0.0;
  r.maxResidual = std::max(res.residualPhonon, res.residualPhason);
  diag.append(r);
  write_vtk_snapshot(outpath(sc, "fields_final.vtk"), sc.grid, res.state,
                     sc.material);

  RunReport rep;
  rep.exitCode = res.converged ? 0 : 3;
  rep.summary = "minimize: " + std::to_string(res.iterations) + " iterations, " +
                "residuals " + format_double(res.residualPhonon) + " / " +
                format_double(res.residualPhason) +
                (res.converged ? "" : " (not converged)");
  return rep;
}

RunReport run_interface(const Scenario& sc) {
  if (!sc.interface.has_value())
    throw Error("interface stage needs an interface block in the scenario");
  const InterfaceSpec& spec = *sc.interface;
  InterfaceCurve curve =
      InterfaceCurve::circle(spec.center, spec.radius, spec.markers, spec.ftilde);
  curve.sem = spec.surface;

  // one-way coupling: bulk fields are frozen at the initial state
  NodalFields bulk;
  bool haveBulk = false;
  if (spec.coupleBulk) {
    const FieldState s = build_initial_state(sc);
    bulk = sample_bulk(s, sc.grid, sc.material);
    haveBulk = true;
  }

  InterfaceWriter out(outpath(sc, "interface.csv"));
  out.append(0.0, curve);
  double t = 0.0;
  long long step = 0;
  RunReport rep;
  while (t < spec.tEnd - 0.5 * spec.dt) {
    if (sc.sim.maxSteps >= 0 && step >= sc.sim.maxSteps) break;
    try {
      if (haveBulk) {
        const JumpSample js =
            sample_jumps(bulk, sc.grid, curve, spec.epsFactor * sc.grid.h[0]);
        evolve_interface(curve, &js, spec.dt, sc.material.rho0, sc.material.rhoBar);
      } else {
        evolve_interface(curve, nullptr, spec.dt);
      }
    } catch (const NoRealRoot& e) {
      rep.exitCode = 4;
      rep.summary = std::string("interface: step rejected: ") + e.what();
      return rep;
    }
    t += spec.dt;
    ++step;
    if (spec.outputEvery > 0 && step % spec.outputEvery == 0) out.append(t, curve);
  }
  out.append(t, curve);
  rep.summary = "interface: " + std::to_string(step) + " steps, " +
                std::to_string(curve.size()) + " markers";
  return rep;
}

namespace {

void suite_invariance(const Scenario& sc, ReportWriter& out) {
  const MaterialModel inv = MaterialModel::isotropic_stvenant(
      sc.material.rho0, std::max(sc.material.rhoBar, 0.5), 1.0, 0.5, 0.8, 0.0);
  const auto rep = invariance_probe(inv, sc.verify.samples, sc.seed + 11);
  out.append("invariance", "energy_invariance", rep.maxEnergyResidual, 1e-10,
             rep.maxEnergyResidual <= 1e-10);
  out.append("invariance", "moment_residual", rep.maxMomentResidual, 1e-10,
             rep.maxMomentResidual <= 1e-10);
  out.append("invariance", "nonconvexity_gap", rep.nonconvexityGap, 0.0,
             rep.nonconvexityGap > 0.0);
  MaterialModel broken = MaterialModel::icosahedral(
      ModelKind::IICQuadratic, 1.0, 0.5, 1.0, 0.5, 0.8, 0.0, 0.4);
  broken.kind = ModelKind::IICStVenant;
  const auto rb = invariance_probe(broken, sc.verify.samples, sc.seed + 12);
  out.append("invariance", "broken_control_detected", rb.maxMomentResidual, 1e-3,
             rb.maxMomentResidual > 1e-3);
}

void suite_metric(const Scenario& sc, ReportWriter& out) {
  const MaterialModel m =
      (sc.material.kind == ModelKind::IICStVenant && sc.material.metricInvariant)
          ? sc.material
          : MaterialModel::isotropic_stvenant(1.0, 1.0, 1.2, 0.7, 0.8, 0.4);
  Rng rng(sc.seed + 21);
  double worstRel = 0.0, worstSkw = 0.0;
  for (int t = 0; t < sc.verify.samples; ++t) {
    DeformationPoint dp;
    do {
      dp.F = Mat3::identity() + rng.mat3(0.25);
    } while (det(dp.F) < 0.2);
    dp.gradW = rng.mat3(0.3);
    const Vec3 w = rng.vec3(0.4);
    const Mat3 Ssym = sym(rng.mat3(0.2));
    const Mat3 gamma = Mat3::identity() + 0.8 * Ssym + 0.4 * (Ssym * Ssym);
    DeformationPoint dg = dp;
    dg.gammaRef = gamma;
    const double scale = norm(stresses(m, dg, w).eshelby) + 1e-30;
    const auto repm = metric_relation_residual(m, dp, w, gamma);
    worstRel = std::max(worstRel, norm(repm.residual) / scale);
    worstSkw = std::max(worstSkw, norm(repm.skwRaised) / scale);
  }
  out.append("metric", "relation_residual", worstRel, 1e-6, worstRel <= 1e-6);
  out.append("metric", "raised_symmetry", worstSkw, 1e-6, worstSkw <= 1e-6);
}

void suite_universal_affine(const Scenario& sc, ReportWriter& out) {
  const MaterialModel m =
      (sc.material.kind == ModelKind::IICQuadratic ||
       sc.material.kind == ModelKind::IQQuadratic)
          ? sc.material
          : MaterialModel::icosahedral(ModelKind::IICQuadratic, 1.0, 0.5, 1.0,
                                       0.5, 0.8, 0.2, 0.2);
  const auto res = universal_affine_check(m, sc.verify.gridCells, sc.seed + 31);
  out.append("universal_affine", "block_determinant", std::abs(res.detNormalized),
             1e-6, std::abs(res.detNormalized) > 1e-6);
  out.append("universal_affine", "interior_affinity", res.affinityResidual, 1e-8,
             res.affinityResidual <= 1e-8);
}

void suite_eshelby(const Scenario& sc, ReportWriter& out) {
  Grid g;
  g.dim = 2;
  g.cells = {sc.verify.gridCells, sc.verify.gridCells};
  g.h = {1.0 / sc.verify.gridCells, 1.0 / sc.verify.gridCells};
  const MaterialModel m = MaterialModel::isotropic_stvenant(1.0, 0.5, 1.0, 0.5,
                                                            0.8, 0.0);
  FieldState s = FieldState::natural(g);
  for (std::size_t id = 0; id < s.size(); ++id) {
    const Vec3 X = g.coord(id);
    s.x[id].x += 0.02 * std::sin(2 * X.x + X.y);
    s.x[id].y += 0.015 * std::cos(X.x - 0.5 * X.y);
    s.w[id] = Vec3{0.03 * std::sin(X.x), 0.02 * X.y, 0.0};
  }
  const double r = eshelby_symmetry_residual(s, g, m);
  out.append("eshelby", "raised_index_symmetry", r, 1e-6, r <= 1e-6);
}

void suite_noether(const Scenario& sc, ReportWriter& out) {
  // translation currents on a short periodic run of a coupled IIC model
  {
    Grid g;
    g.dim = 1;
    g.cells = {64, 1};
    g.h = {1.0 / 64, 1.0};
    g.periodic = {true, false};
    const MaterialModel m = MaterialModel::icosahedral(ModelKind::IICQuadratic,
                                                       1.0, 0.5, 1.0, 0.5, 0.8,
                                                       0.2, 0.1);
    const BoundaryConditions bc = BoundaryConditions::periodic_all(g);
    Assembly asmb(g, m, bc);
    FieldState s = FieldState::natural(g);
    Rng rng(sc.seed + 41);
    for (int i = 0; i < 64; ++i) {
      const double X = g.coord(i, 0).x;
      s.x[g.id(i, 0)].x += 1e-3 * std::sin(6.283185307179586 * X);
      s.w[g.id(i, 0)].y += 1e-3 * std::cos(6.283185307179586 * X);
      s.v[g.id(i, 0)].x = 1e-3 * std::cos(6.283185307179586 * X + 0.3);
      s.wv[g.id(i, 0)].x = 1e-3 * std::sin(6.283185307179586 * X + 1.1);
    }
    const double dt = 0.2 * asmb.dt_bound_hyperbolic();
    std::vector<FieldState> traj{s};
    for (int k = 0; k < 30; ++k) {
      step_conservative(s, asmb, dt);
      traj.push_back(s);
    }
    for (auto gen : {SymmetryGenerator::spatial_translation(Vec3{1, 0, 0}),
                     SymmetryGenerator::phason_translation(Vec3{1, 0, 0})}) {
      const auto r = conservation_residual(traj, dt, g, m, bc, gen);
      const double rel = r.maxChargeStep / std::max(1e-300, r.chargeScale);
      out.append("noether", r.generator + "_charge_step", rel, 1e-12,
                 rel <= 1e-12);
    }
  }
  // rotation/relabeling orders on bounded 2-D refinements
  {
    const MaterialModel m = MaterialModel::isotropic_stvenant(1.0, 0.5, 1.0, 0.5,
                                                              0.8, 0.0);
    std::vector<double> errsRot, errsRel;
    for (int n : {16, 32, 64}) {
      Grid g;
      g.dim = 2;
      g.cells = {n, n};
      g.h = {1.0 / n, 1.0 / n};
      const BoundaryConditions bc = BoundaryConditions::natural_all(g);
      Assembly asmb(g, m, bc);
      FieldState s = FieldState::natural(g);
      for (std::size_t id = 0; id < s.size(); ++id) {
        const Vec3 X = g.coord(id);
        const double b1 = std::sin(3.14159265358979 * X.x) *
                          std::sin(3.14159265358979 * X.y);
        const double b2 = std::sin(3.14159265358979 * X.x) *
                          std::sin(6.28318530717959 * X.y);
        s.x[id].x += 0.02 * b1;
        s.x[id].y -= 0.015 * b2;
        s.w[id] = Vec3{0.02 * b1, 0.012 * b2, 0.008 * b1};
        s.v[id] = Vec3{0.01 * b2, -0.008 * b1, 0.0};
        s.wv[id] = Vec3{0.009 * b1, 0.011 * b2, 0.004 * b2};
      }
      const double dt = (0.02 / n) / 1.6;
      std::vector<FieldState> traj{s};
      for (int k = 0; k < n / 4; ++k) {
        step_conservative(s, asmb, dt);
        traj.push_back(s);
      }
      errsRot.push_back(conservation_residual(
                            traj, dt, g, m, bc,
                            SymmetryGenerator::spatial_rotation(
                                Vec3{0, 0, 0.8}, Vec3{0.5, 0.5, 0}))
                            .maxPointwise);
      const auto rel = SymmetryGenerator::relabeling(g, [](const Vec3& X) {
        return 0.3 * std::sin(6.28318530717959 * X.x) *
                   std::cos(3.14159265358979 * X.y) +
               0.2 * X.x * X.y * X.y;
      });
      errsRel.push_back(
          conservation_residual(traj, dt, g, m, bc, rel).maxPointwise);
    }
    const double oRot = refinement_order(errsRot);
    const double oRel = refinement_order(errsRel);
    out.append("noether", "rotation_order", oRot, 1.8, oRot >= 1.8);
    out.append("noether", "relabeling_order", oRel, 1.8, oRel >= 1.8);
  }
}

void suite_power(const Scenario& sc, ReportWriter& out) {
  const Vec3 b{0.3, 0.2, 0.0};
  std::vector<double> errsF, errsM;
  for (int n : {12, 24, 48}) {
    Grid g;
    g.dim = 2;
    g.cells = {n, n};
    g.h = {1.0 / n, 1.0 / n};
    MaterialModel m = MaterialModel::icosahedral(ModelKind::IICQuadratic, 1.0,
                                                 0.5, 1.0, 0.5, 0.8, 0.2, 0.15);
    BoundaryConditions bc;
    for (int a = 0; a < 2; ++a)
      for (int sd = 0; sd < 2; ++sd) {
        bc.at(a, sd, 0).kind = BcKind::Dirichlet;
        bc.at(a, sd, 0).affine = Mat3::identity();
        bc.at(a, sd, 1).kind = BcKind::Dirichlet;
      }
    bc.bodyForce = b;
    MinimizeOptions opt;
    opt.tol = 1e-11;
    const MinimizeResult mr =
        minimize_energy(g, m, bc, FieldState::natural(g), opt);
    const std::vector<FieldState> traj = {mr.state, mr.state, mr.state};
    const std::vector<PartRange> parts = {{n / 4, 3 * n / 4, n / 4, 3 * n / 4}};
    const auto rep =
        power_invariance_check(traj, 0.01, g, m, parts, Vec3{0.5, 0.5, 0}, b);
    errsF.push_back(rep.forceResidual[0] / rep.forceScale);
    errsM.push_back(rep.momentResidual[0] / rep.momentScale);
  }
  const double oF = refinement_order(errsF);
  const double oM = refinement_order(errsM);
  out.append("power", "force_balance_order", oF, 1.8, oF >= 1.8);
  out.append("power", "moment_balance_order", oM, 1.8, oM >= 1.8);

  // the pointwise rotational identity holds exactly only for rotation-
  // invariant energies, so it is probed on a finite-strain isotropic run
  {
    Grid g;
    g.dim = 2;
    g.cells = {16, 16};
    g.h = {1.0 / 16, 1.0 / 16};
    const MaterialModel m = MaterialModel::isotropic_stvenant(1.0, 0.5, 1.0, 0.5,
                                                              0.8, 0.0);
    const BoundaryConditions bc = BoundaryConditions::natural_all(g);
    Assembly asmb(g, m, bc);
    FieldState s = FieldState::natural(g);
    for (std::size_t id = 0; id < s.size(); ++id) {
      const Vec3 X = g.coord(id);
      const double bump = std::sin(3.14159265358979 * X.x) *
                          std::sin(3.14159265358979 * X.y);
      s.x[id].x += 0.02 * bump;
      s.w[id].y = 0.015 * bump;
    }
    const double dt = 0.2 * asmb.dt_bound_hyperbolic();
    std::vector<FieldState> traj{s};
    for (int k = 0; k < 6; ++k) {
      step_conservative(s, asmb, dt);
      traj.push_back(s);
    }
    const std::vector<PartRange> parts = {{3, 13, 3, 13}};
    const auto rep =
        power_invariance_check(traj, dt, g, m, parts, Vec3{0.5, 0.5, 0});
    out.append("power", "pointwise_moment_identity", rep.maxPointwiseMoment,
               1e-10, rep.maxPointwiseMoment <= 1e-10);
  }
  (void)sc;
}

}  // namespace

RunReport run_verify(const Scenario& sc) {
  ReportWriter out(outpath(sc, "report.csv"));
  std::vector<std::string> suites = sc.verify.suites;
  if (suites.empty())
    suites = {"invariance", "metric", "universal_affine", "eshelby", "noether",
              "power"};
  for (const std::string& s : suites) {
    if (s == "invariance") suite_invariance(sc, out);
    else if (s == "metric") suite_metric(sc, out);
    else if (s == "universal_affine") suite_universal_affine(sc, out);
    else if (s == "eshelby") suite_eshelby(sc, out);
    else if (s == "noether") suite_noether(sc, out);
    else if (s == "power") suite_power(sc, out);
  }
  RunReport rep;
  rep.exitCode = out.failures() == 0 ? 0 : 2;
  rep.summary = "verify: " + std::to_string(out.failures()) + " failed check(s)";
  return rep;
}

RunReport run(const Scenario& sc, const std::string& stage) {
  if (stage == "simulate") return run_simulate(sc);
  if (stage == "minimize") return run_minimize(sc);
  if (stage == "verify") return run_verify(sc);
  if (stage == "interface") return run_interface(sc);
  throw Error("unknown stage " + stage);
}

}  // namespace qld
