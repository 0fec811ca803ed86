#include <cmath>
#include <vector>

#include "qld/dynamics.hpp"
#include "qld/errors.hpp"

namespace qld {

namespace {

// The search space is the free (x, w) nodal components.  A diagonal
// preconditioner per channel (modulus scale times nodal volume) keeps the
// phonon/phason stiffness mismatch from wrecking the CG conditioning.
struct DofSpace {
  const Assembly* a;
  double scaleX = 1.0, scaleW = 1.0;

  explicit DofSpace(const Assembly& asmb) : a(&asmb) {
    init_scales(asmb.model());
  }

  void init_scales(const MaterialModel& m) {
    double cx = 0.0, cw = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) {
            cx = std::max(cx, std::abs(m.Cph(i, j, k, l)));
            cw = std::max(cw, std::abs(m.Kph(i, j, k, l)));
          }
    scaleX = cx > 0.0 ? cx : 1.0;
    scaleW = cw > 0.0 ? cw : scaleX;
  }

  double dot_free(const ForceField& p, const ForceField& q) const {
    double s = 0.0;
    for (std::size_t i = 0; i < p.fx.size(); ++i) {
      if (!a->fixed_phonon(i)) s += dot(p.fx[i], q.fx[i]);
      if (!a->fixed_phason(i)) s += dot(p.fw[i], q.fw[i]);
    }
    return s;
  }

  double max_abs(const ForceField& d) const {
    double s = 0.0;
    for (std::size_t i = 0; i < d.fx.size(); ++i) {
      if (!a->fixed_phonon(i)) s = std::max(s, norm(d.fx[i]));
      if (!a->fixed_phason(i)) s = std::max(s, norm(d.fw[i]));
    }
    return s;
  }

  void precondition(const ForceField& g, ForceField& z) const {
    const auto& vol = a->node_volume();
    z.fx.resize(g.fx.size());
    z.fw.resize(g.fw.size());
    for (std::size_t i = 0; i < g.fx.size(); ++i) {
      z.fx[i] = a->fixed_phonon(i) ? Vec3{} : g.fx[i] / (vol[i] * scaleX);
      z.fw[i] = a->fixed_phason(i) ? Vec3{} : g.fw[i] / (vol[i] * scaleW);
    }
  }

  void axpy(FieldState& s, double alpha, const ForceField& d) const {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!a->fixed_phonon(i)) s.x[i] += alpha * d.fx[i];
      if (!a->fixed_phason(i)) s.w[i] += alpha * d.fw[i];
    }
  }
};

void gradient(const Assembly& a, const FieldState& s, ForceField& g) {
  a.forces(s, g);
  for (std::size_t i = 0; i < g.fx.size(); ++i) {
    g.fx[i] = a.fixed_phonon(i) ? Vec3{} : -1.0 * g.fx[i];
    g.fw[i] = a.fixed_phason(i) ? Vec3{} : -1.0 * g.fw[i];
  }
}

// a channel with loads but no Dirichlet/periodic closure can descend forever
void check_pinning(const Grid& g, const BoundaryConditions& bc) {
  for (int ch = 0; ch < 2; ++ch) {
    bool pinned = bc.has_dirichlet(ch, g);
    for (int a = 0; a < g.dim; ++a) pinned = pinned || g.periodic[a];
    if (pinned) continue;
    bool loaded = (ch == 0) && norm2(bc.bodyForce) > 0.0;
    for (int a = 0; a < g.dim; ++a)
      for (int sd = 0; sd < 2; ++sd)
        if (bc.at(a, sd, ch).kind == BcKind::Traction &&
            norm2(bc.at(a, sd, ch).value) > 0.0)
          loaded = true;
    if (loaded)
      throw Error("minimize_energy: a loaded channel needs a Dirichlet "
                  "constraint or periodic closure to pin rigid modes");
  }
}

}  // namespace

namespace {

// Quadratic kinds: the gradient is affine in the state, so preconditioned
// linear CG applies, matrix-free, with the operator action taken from scaled
// gradient differences (exact by linearity).  Driving on the gradient instead
// of energy comparisons avoids the sqrt(eps) stall of an energy line search.
MinimizeResult minimize_linear_cg(Assembly& asmb, const FieldState& init,
                                  const MinimizeOptions& opt) {
  MinimizeResult res;
  res.state = init;
  asmb.apply_dirichlet(res.state);
  FieldState& s = res.state;
  DofSpace dof(asmb);
  const Grid& grid = asmb.grid();
  const double hMin = std::min(grid.h[0], grid.h[grid.dim - 1]);
  const double tolAbs = opt.tol * asmb.modulus_scale();
  const auto& vol = asmb.node_volume();

  auto residual_ok = [&](const ForceField& r, double& rp, double& rw) {
    rp = rw = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!asmb.fixed_phonon(i)) rp = std::max(rp, norm(r.fx[i]) / vol[i]);
      if (!asmb.fixed_phason(i)) rw = std::max(rw, norm(r.fw[i]) / vol[i]);
    }
    return std::max(rp, rw) <= tolAbs;
  };

  ForceField g, r, z, pdir, gProbe, Ap;
  FieldState probe = s;
  gradient(asmb, s, g);
  r = g;
  for (auto& v : r.fx) v = -1.0 * v;
  for (auto& v : r.fw) v = -1.0 * v;
  dof.precondition(r, z);
  pdir = z;
  double rz = dof.dot_free(r, z);

  int it = 0;
  for (; it < opt.maxIterations; ++it) {
    double rp, rw;
    if (residual_ok(r, rp, rw)) {
      res.residualPhonon = rp;
      res.residualPhason = rw;
      res.converged = true;
      break;
    }
    const double pInf = dof.max_abs(pdir);
    if (pInf == 0.0) break;
    double t = std::min(1.0, 0.25 * hMin / pInf);
    bool applied = false;
    for (int attempt = 0; attempt < 8 && !applied; ++attempt) {
      probe = s;
      dof.axpy(probe, t, pdir);
      try {
        gradient(asmb, probe, gProbe);
        applied = true;
      } catch (const OrientationViolation&) {
        t *= 0.25;
      }
    }
    if (!applied) break;
    // A p = (g(s + t p) - g(s))/t ; g(s) = -r by the recurrence
    Ap.fx.resize(s.size());
    Ap.fw.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      Ap.fx[i] = asmb.fixed_phonon(i) ? Vec3{} : (gProbe.fx[i] + r.fx[i]) / t;
      Ap.fw[i] = asmb.fixed_phason(i) ? Vec3{} : (gProbe.fw[i] + r.fw[i]) / t;
    }
    const double pAp = dof.dot_free(pdir, Ap);
    if (!(pAp > 0.0)) break;
    const double alpha = rz / pAp;
    dof.axpy(s, alpha, pdir);
    if ((it + 1) % 64 == 0) {
      // refresh the residual from the true gradient to control drift
      gradient(asmb, s, g);
      for (std::size_t i = 0; i < s.size(); ++i) {
        r.fx[i] = -1.0 * g.fx[i];
        r.fw[i] = -1.0 * g.fw[i];
      }
    } else {
      for (std::size_t i = 0; i < s.size(); ++i) {
        r.fx[i] -= alpha * Ap.fx[i];
        r.fw[i] -= alpha * Ap.fw[i];
      }
    }
    dof.precondition(r, z);
    const double rzNew = dof.dot_free(r, z);
    const double beta = rzNew / rz;
    rz = rzNew;
    for (std::size_t i = 0; i < s.size(); ++i) {
      pdir.fx[i] = z.fx[i] + beta * pdir.fx[i];
      pdir.fw[i] = z.fw[i] + beta * pdir.fw[i];
    }
  }
  res.iterations = it;
  auto [rp, rw] = asmb.residual_norms(s);
  res.residualPhonon = rp;
  res.residualPhason = rw;
  if (std::max(rp, rw) <= tolAbs) res.converged = true;
  return res;
}

}  // namespace

MinimizeResult minimize_energy(const Grid& grid, const MaterialModel& model,
                               const BoundaryConditions& bc, const FieldState& init,
                               const MinimizeOptions& opt) {
  Assembly asmb(grid, model, bc);
  check_pinning(grid, bc);

  if ((model.kind == ModelKind::IICQuadratic ||
       model.kind == ModelKind::IQQuadratic))
    return minimize_linear_cg(asmb, init, opt);

  MinimizeResult res;
  res.state = init;
  asmb.apply_dirichlet(res.state);
  FieldState& s = res.state;

  DofSpace dof(asmb);
  // energy guarded against element inversion while probing
  auto safe_energy = [&](const FieldState& state, bool& ok) {
    try {
      ok = true;
      return asmb.potential_energy(state);
    } catch (const OrientationViolation&) {
      ok = false;
      return 0.0;
    }
  };

  ForceField g, gNew, z, zOld, d, probeG;
  gradient(asmb, s, g);
  dof.precondition(g, z);
  d = z;
  for (auto& v : d.fx) v = -1.0 * v;
  for (auto& v : d.fw) v = -1.0 * v;
  double gz = dof.dot_free(g, z);
  double phi = asmb.potential_energy(s);

  const double tolAbs = opt.tol * asmb.modulus_scale();
  const double hMin = grid.h[0] < grid.h[grid.dim - 1] ? grid.h[0] : grid.h[grid.dim - 1];
  FieldState probe = s;

  int it = 0;
  for (; it < opt.maxIterations; ++it) {
    double rp = 0.0, rw = 0.0;
    {
      const auto& vol = asmb.node_volume();
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!asmb.fixed_phonon(i)) rp = std::max(rp, norm(g.fx[i]) / vol[i]);
        if (!asmb.fixed_phason(i)) rw = std::max(rw, norm(g.fw[i]) / vol[i]);
      }
    }
    res.residualPhonon = rp;
    res.residualPhason = rw;
    if (std::max(rp, rw) <= tolAbs) {
      res.converged = true;
      break;
    }

    const double gd = dof.dot_free(g, d);
    if (gd >= 0.0) {  // not a descent direction: restart on steepest descent
      d = z;
      for (auto& v : d.fx) v = -1.0 * v;
      for (auto& v : d.fw) v = -1.0 * v;
      continue;
    }

    // curvature probe along d, trust-region limited so faces cannot invert;
    // exact line minimum for the quadratic kinds at any probe length
    const double dInf = dof.max_abs(d);
    double tProbe = std::min(1.0, 0.25 * hMin / (dInf + 1e-300));
    double curv = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      probe = s;
      dof.axpy(probe, tProbe, d);
      try {
        gradient(asmb, probe, probeG);
      } catch (const OrientationViolation&) {
        tProbe *= 0.25;
        continue;
      }
      curv = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!asmb.fixed_phonon(i)) curv += dot(probeG.fx[i] - g.fx[i], d.fx[i]);
        if (!asmb.fixed_phason(i)) curv += dot(probeG.fw[i] - g.fw[i], d.fw[i]);
      }
      curv /= tProbe;
      break;
    }
    double alpha = (curv > 0.0) ? -gd / curv : tProbe;

    // Armijo backtracking on the energy (inverted probes count as +infinity)
    double phiNew = 0.0;
    bool ok = false;
    for (int bt = 0; bt < 60; ++bt) {
      probe = s;
      dof.axpy(probe, alpha, d);
      bool finiteE = false;
      phiNew = safe_energy(probe, finiteE);
      if (finiteE && std::isfinite(phiNew) && phiNew <= phi + 1e-4 * alpha * gd) {
        ok = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!ok) break;  // line search stall

    s = probe;
    phi = phiNew;
    gradient(asmb, s, gNew);
    dof.precondition(gNew, z);
    const double gzNew = dof.dot_free(gNew, z);
    dof.precondition(g, zOld);
    const double gzCross = dof.dot_free(gNew, zOld);
    const double beta = std::max(0.0, (gzNew - gzCross) / gz);
    for (std::size_t i = 0; i < s.size(); ++i) {
      d.fx[i] = -1.0 * z.fx[i] + beta * d.fx[i];
      d.fw[i] = -1.0 * z.fw[i] + beta * d.fw[i];
    }
    g = gNew;
    gz = gzNew;
  }
  res.iterations = it;
  auto [rp, rw] = asmb.residual_norms(s);
  res.residualPhonon = rp;
  res.residualPhason = rw;
  if (std::max(rp, rw) <= tolAbs) res.converged = true;
  return res;
}

}  // namespace qld
