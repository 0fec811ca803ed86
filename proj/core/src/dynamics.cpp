#include "qld/dynamics.hpp"

#include <cmath>

#include "qld/errors.hpp"
#include "qld/kinematics.hpp"
#include "qld/smalldense.hpp"

namespace qld {

void DiagnosticsLog::append(const DiagRow& r) {
  if (!rows.empty() && !(r.t >= rows.back().t))
    throw Error("diagnostics log requires monotone time stamps");
  rows.push_back(r);
}

namespace {

struct Stencil {
  int n = 0;
  std::array<std::pair<std::size_t, double>, 3> t;
};

// nodal derivative stencil along `axis` at (i,j) for the assembly: central in
// the interior, summation-by-parts closure (one-sided first order) at bounded
// ends.  The SBP closure telescopes exactly against the trapezoid face
// weights, so an affine state is force-free at every interior node (discrete
// patch test); a wider boundary stencil would break that.
Stencil stencil_along(const Grid& g, int i, int j, int axis) {
  Stencil s;
  const int nk = g.nodes_along(axis);
  const double inv2h = 1.0 / (2.0 * g.h[axis]);
  const int k = (axis == 0) ? i : j;
  auto id_at = [&](int kk) {
    return (axis == 0) ? g.id(kk, j) : g.id(i, kk);
  };
  if (g.periodic[axis]) {
    s.n = 2;
    s.t[0] = {id_at((k + 1) % nk), inv2h};
    s.t[1] = {id_at((k + nk - 1) % nk), -inv2h};
  } else if (k == 0) {
    s.n = 2;
    s.t[0] = {id_at(1), 2.0 * inv2h};
    s.t[1] = {id_at(0), -2.0 * inv2h};
  } else if (k == nk - 1) {
    s.n = 2;
    s.t[0] = {id_at(nk - 1), 2.0 * inv2h};
    s.t[1] = {id_at(nk - 2), -2.0 * inv2h};
  } else {
    s.n = 2;
    s.t[0] = {id_at(k + 1), inv2h};
    s.t[1] = {id_at(k - 1), -inv2h};
  }
  return s;
}

struct Face {
  std::size_t n1 = 0, n2 = 0;
  int axis = 0;
  int baxis = -1;  // transverse axis in 2-D, -1 in 1-D
  double weight = 0.0;  // V_f / dim
  double invH = 0.0;
  Stencil s1, s2;
};

Vec3 stencil_eval(const std::vector<Vec3>& f, const Stencil& s) {
  Vec3 v{};
  for (int k = 0; k < s.n; ++k) v += s.t[k].second * f[s.t[k].first];
  return v;
}

void set_column(Mat3& m, int col, const Vec3& v) {
  m(0, col) = v.x;
  m(1, col) = v.y;
  m(2, col) = v.z;
}

Vec3 column(const Mat3& m, int col) { return {m(0, col), m(1, col), m(2, col)}; }

void add_column(Mat3& m, int col, const Vec3& v) {
  m(0, col) += v.x;
  m(1, col) += v.y;
  m(2, col) += v.z;
}

// face deformation data: exact difference along the face axis, averaged nodal
// stencils transversally, identity/zero inactive columns.  Gradients are taken
// on the displacement u = x - X (periodic-safe); F = I + grad u.
void face_kinematics(const std::vector<Vec3>& u, const std::vector<Vec3>& w,
                     const Face& f, DeformationPoint& dp, Vec3& wf) {
  dp.F = Mat3::identity();
  dp.gradW = Mat3::zero();
  add_column(dp.F, f.axis, (u[f.n2] - u[f.n1]) * f.invH);
  set_column(dp.gradW, f.axis, (w[f.n2] - w[f.n1]) * f.invH);
  if (f.baxis >= 0) {
    add_column(dp.F, f.baxis, 0.5 * (stencil_eval(u, f.s1) + stencil_eval(u, f.s2)));
    set_column(dp.gradW, f.baxis, 0.5 * (stencil_eval(w, f.s1) + stencil_eval(w, f.s2)));
  }
  wf = 0.5 * (w[f.n1] + w[f.n2]);
}

std::vector<Vec3> displacement_field(const FieldState& s, const Grid& g) {
  std::vector<Vec3> u(s.size());
  for (std::size_t id = 0; id < s.size(); ++id) u[id] = s.x[id] - g.coord(id);
  return u;
}

}  // namespace

template <typename FaceFn>
void Assembly::for_each_face(FaceFn&& fn) const {
  const Grid& g = *g_;
  for (int a = 0; a < g.dim; ++a) {
    const int na = g.nodes_along(a);
    const int nFaces = g.periodic[a] ? na : na - 1;
    const int b = (g.dim == 2) ? 1 - a : -1;
    const int nb = (b >= 0) ? g.nodes_along(b) : 1;
    for (int jb = 0; jb < nb; ++jb) {
      double tfac = 1.0;
      if (b >= 0) {
        tfac = g.h[b];
        if (!g.periodic[b] && (jb == 0 || jb == nb - 1)) tfac *= 0.5;
      }
      Face f;
      f.axis = a;
      f.baxis = b;
      f.invH = 1.0 / g.h[a];
      f.weight = g.h[a] * tfac / g.dim;
      for (int ia = 0; ia < nFaces; ++ia) {
        const int ia2 = (ia + 1) % na;
        if (a == 0) {
          f.n1 = g.id(ia, jb);
          f.n2 = g.id(ia2, jb);
          if (b >= 0) {
            f.s1 = stencil_along(g, ia, jb, b);
            f.s2 = stencil_along(g, ia2, jb, b);
          }
        } else {
          f.n1 = g.id(jb, ia);
          f.n2 = g.id(jb, ia2);
          f.s1 = stencil_along(g, jb, ia, b);
          f.s2 = stencil_along(g, jb, ia2, b);
        }
        fn(f);
      }
    }
  }
}

Assembly::Assembly(const Grid& g, const MaterialModel& m,
                   const BoundaryConditions& bc)
    : g_(&g), m_(&m), bc_(&bc) {
  g.validate();
  m.validate();
  bc.validate(g);
  const std::size_t n = g.node_count();
  vol_.resize(n);
  fixedX_.assign(n, 0);
  fixedW_.assign(n, 0);
  const int nx = g.nodes_along(0);
  for (std::size_t id = 0; id < n; ++id) {
    const int i = int(id % nx), j = int(id / nx);
    vol_[id] = g.node_weight(i, j);
    for (int a = 0; a < g.dim; ++a)
      for (int s = 0; s < 2; ++s)
        if (g.on_boundary(i, j, a, s)) {
          if (bc.at(a, s, 0).kind == BcKind::Dirichlet) fixedX_[id] = 1;
          if (bc.at(a, s, 1).kind == BcKind::Dirichlet) fixedW_[id] = 1;
        }
  }
  precompute_bounds();
}

void Assembly::precompute_bounds() {
  const MaterialModel& m = *m_;
  double khat2 = 0.0;
  double hypSum = 0.0;
  double kMax = 0.0;
  for (int a = 0; a < g_->dim; ++a) {
    const bool phason = m.rhoBar > 0.0;
    const std::size_t nsym = phason ? 6 : 3;
    DenseMat N(nsym);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        N(i, j) = m.Cph(i, a, j, a) / m.rho0;
        if (phason) {
          N(3 + i, 3 + j) = m.Kph(i, a, j, a) / m.rhoBar;
          const double c = m.Rc(i, a, j, a) / std::sqrt(m.rho0 * m.rhoBar);
          N(i, 3 + j) = c;
          N(3 + j, i) = c;
        }
      }
    // symmetrize before the eigen sweep
    for (std::size_t i = 0; i < nsym; ++i)
      for (std::size_t j = i + 1; j < nsym; ++j) {
        const double v = 0.5 * (N(i, j) + N(j, i));
        N(i, j) = N(j, i) = v;
      }
    const double lam = std::max(0.0, jacobi_eigenvalues(N).back());
    hypSum += 4.0 / (g_->h[a] * g_->h[a]) * lam;
    khat2 += 4.0 / (g_->h[a] * g_->h[a]);

    DenseMat K3(3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        K3(i, j) = 0.5 * (m.Kph(i, a, j, a) + m.Kph(j, a, i, a));
    kMax = std::max(kMax, std::max(0.0, jacobi_eigenvalues(K3).back()));
  }
  hypOmegaMax_ = std::sqrt(hypSum);
  modulusScale_ = 0.0;
  {
    DenseMat M9(9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) {
            const double v = 0.5 * (m.Cph(i, j, k, l) + m.Cph(k, l, i, j));
            M9(3 * i + j, 3 * k + l) = v;
          }
    modulusScale_ = std::abs(jacobi_eigenvalues(M9).back());
    DenseMat K9(9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l)
            K9(3 * i + j, 3 * k + l) = 0.5 * (m.Kph(i, j, k, l) + m.Kph(k, l, i, j));
    modulusScale_ = std::max(modulusScale_, std::abs(jacobi_eigenvalues(K9).back()));
    modulusScale_ = std::max(modulusScale_, m.alpha);
    if (modulusScale_ == 0.0) modulusScale_ = 1.0;
  }
  const double cmin = m.cstar_min();
  const double denomHigh = cmin + m.omega * khat2;
  parRateMax_ = (denomHigh > 0.0) ? (kMax * khat2 + m.alpha) / denomHigh : 0.0;
  if (m.alpha > 0.0 && cmin > 0.0)
    parRateMax_ = std::max(parRateMax_, m.alpha / cmin);
}

double Assembly::dt_bound_hyperbolic() const {
  return hypOmegaMax_ > 0.0 ? 2.0 / hypOmegaMax_ : 1e300;
}

double Assembly::dt_bound_parabolic() const {
  return parRateMax_ > 0.0 ? 2.0 / parRateMax_ : 1e300;
}

double Assembly::potential_energy(const FieldState& s) const {
  double E = 0.0;
  const MaterialModel& m = *m_;
  const std::vector<Vec3> u = displacement_field(s, *g_);
  for_each_face([&](const Face& f) {
    DeformationPoint dp;
    Vec3 wf;
    face_kinematics(u, s.w, f, dp, wf);
    E += f.weight * m.rho0 * energy(m, dp, wf);
  });
  // external body potential  w_ext(x) = -b.x  per unit mass
  const Vec3 b = bc_->bodyForce;
  if (norm2(b) > 0.0)
    for (std::size_t id = 0; id < s.size(); ++id)
      E -= vol_[id] * m.rho0 * dot(b, s.x[id]);
  boundary_terms(s, &E, nullptr);
  return E;
}

void Assembly::forces(const FieldState& s, ForceField& out) const {
  const std::size_t n = s.size();
  out.fx.assign(n, Vec3{});
  out.fw.assign(n, Vec3{});
  const MaterialModel& m = *m_;
  const std::vector<Vec3> u = displacement_field(s, *g_);
  for_each_face([&](const Face& f) {
    DeformationPoint dp;
    Vec3 wf;
    face_kinematics(u, s.w, f, dp, wf);
    const StressBundle bnd = stresses(m, dp, wf);
    // face-axis columns: the flux pair
    const Vec3 Pa = f.weight * f.invH * column(bnd.P, f.axis);
    const Vec3 Sa = f.weight * f.invH * column(bnd.S, f.axis);
    out.fx[f.n1] += Pa;
    out.fx[f.n2] -= Pa;
    out.fw[f.n1] += Sa;
    out.fw[f.n2] -= Sa;
    // transverse columns spread through the averaged nodal stencils
    if (f.baxis >= 0) {
      const Vec3 Pb = 0.5 * f.weight * column(bnd.P, f.baxis);
      const Vec3 Sb = 0.5 * f.weight * column(bnd.S, f.baxis);
      for (int k = 0; k < f.s1.n; ++k) {
        out.fx[f.s1.t[k].first] -= f.s1.t[k].second * Pb;
        out.fw[f.s1.t[k].first] -= f.s1.t[k].second * Sb;
      }
      for (int k = 0; k < f.s2.n; ++k) {
        out.fx[f.s2.t[k].first] -= f.s2.t[k].second * Pb;
        out.fw[f.s2.t[k].first] -= f.s2.t[k].second * Sb;
      }
    }
    // local self-force through the face average of w
    if (norm2(bnd.z) > 0.0) {
      const Vec3 zh = 0.5 * f.weight * bnd.z;
      out.fw[f.n1] -= zh;
      out.fw[f.n2] -= zh;
    }
  });
  const Vec3 b = bc_->bodyForce;
  if (norm2(b) > 0.0)
    for (std::size_t id = 0; id < n; ++id) out.fx[id] += vol_[id] * m.rho0 * b;
  boundary_terms(s, nullptr, &out);
}

void Assembly::boundary_terms(const FieldState& s, double* energy,
                              ForceField* f) const {
  const Grid& g = *g_;
  const int nx = g.nodes_along(0);
  for (int a = 0; a < g.dim; ++a) {
    if (g.periodic[a]) continue;
    const int b = (g.dim == 2) ? 1 - a : -1;
    for (int sd = 0; sd < 2; ++sd) {
      const int ia = (sd == 0) ? 0 : g.nodes_along(a) - 1;
      const int nb = (b >= 0) ? g.nodes_along(b) : 1;
      for (int jb = 0; jb < nb; ++jb) {
        double area = 1.0;
        if (b >= 0) {
          area = g.h[b];
          if (!g.periodic[b] && (jb == 0 || jb == nb - 1)) area *= 0.5;
        }
        const std::size_t id = (a == 0) ? g.id(ia, jb) : g.id(jb, ia);
        const Vec3 X = g.coord(int(id % nx), int(id / nx));
        for (int ch = 0; ch < 2; ++ch) {
          const ChannelBc& cbc = bc_->at(a, sd, ch);
          const Vec3& field = (ch == 0) ? s.x[id] : s.w[id];
          switch (cbc.kind) {
            case BcKind::Traction: {
              if (norm2(cbc.value) == 0.0) break;
              if (energy) *energy -= area * dot(cbc.value, field);
              if (f) ((ch == 0) ? f->fx : f->fw)[id] += area * cbc.value;
              break;
            }
            case BcKind::Potential: {
              const Vec3 d = field - potential_ref(cbc, X);
              if (energy) *energy += 0.5 * cbc.stiffness * area * norm2(d);
              if (f) ((ch == 0) ? f->fx : f->fw)[id] -= cbc.stiffness * area * d;
              break;
            }
            case BcKind::Dirichlet:
            case BcKind::Periodic:
              break;
          }
        }
      }
    }
  }
}

void Assembly::viscous_flux_forces(const std::vector<Vec3>& wdot,
                                   std::vector<Vec3>& out) const {
  const double om = m_->omega;
  if (om <= 0.0) return;
  for_each_face([&](const Face& f) {
    // grad wdot at the face, viscous stress omega * grad wdot, same scatter
    Mat3 G = Mat3::zero();
    const Vec3 dwa = (wdot[f.n2] - wdot[f.n1]) * f.invH;
    set_column(G, f.axis, dwa);
    if (f.baxis >= 0) {
      Vec3 dwb{};
      for (int k = 0; k < f.s1.n; ++k) dwb += f.s1.t[k].second * wdot[f.s1.t[k].first];
      Vec3 dwb2{};
      for (int k = 0; k < f.s2.n; ++k) dwb2 += f.s2.t[k].second * wdot[f.s2.t[k].first];
      set_column(G, f.baxis, 0.5 * (dwb + dwb2));
    }
    const Mat3 Sv = om * G;
    const Vec3 Sa = f.weight * f.invH * column(Sv, f.axis);
    out[f.n1] += Sa;
    out[f.n2] -= Sa;
    if (f.baxis >= 0) {
      const Vec3 Sb = 0.5 * f.weight * column(Sv, f.baxis);
      for (int k = 0; k < f.s1.n; ++k) out[f.s1.t[k].first] -= f.s1.t[k].second * Sb;
      for (int k = 0; k < f.s2.n; ++k) out[f.s2.t[k].first] -= f.s2.t[k].second * Sb;
    }
  });
}

void Assembly::local_self_force(const FieldState& s, std::vector<Vec3>& out) const {
  out.assign(s.size(), Vec3{});
  const MaterialModel& m = *m_;
  if (m.alpha == 0.0 && m.kind != ModelKind::Custom &&
      m.kind != ModelKind::IICStVenant)
    return;
  const std::vector<Vec3> u = displacement_field(s, *g_);
  for_each_face([&](const Face& f) {
    DeformationPoint dp;
    Vec3 wf;
    face_kinematics(u, s.w, f, dp, wf);
    const StressBundle bnd = stresses(m, dp, wf);
    if (norm2(bnd.z) == 0.0) return;
    const Vec3 zh = 0.5 * f.weight * bnd.z;
    out[f.n1] += zh;
    out[f.n2] += zh;
  });
}

double Assembly::dissipation_rate(const FieldState& s) const {
  const MaterialModel& m = *m_;
  double D = 0.0;
  // local part: zv . wdot at nodes; state-dependent laws get real gradients
  std::vector<DeformationPoint> dps;
  if (m.customCstar) dps = gradients(s, *g_);
  for (std::size_t id = 0; id < s.size(); ++id) {
    const Mat3& F = m.customCstar ? dps[id].F : Mat3::identity();
    const Mat3& G = m.customCstar ? dps[id].gradW : Mat3::zero();
    const Vec3 zv = m.apply_cstar(F, s.w[id], G, s.wv[id], Mat3::zero());
    D += vol_[id] * dot(zv, s.wv[id]);
  }
  // gradient part: omega |grad wdot|^2 at faces
  if (m.omega > 0.0) {
    for_each_face([&](const Face& f) {
      Mat3 G = Mat3::zero();
      set_column(G, f.axis, (s.wv[f.n2] - s.wv[f.n1]) * f.invH);
      if (f.baxis >= 0) {
        const Vec3 d1 = stencil_eval(s.wv, f.s1);
        const Vec3 d2 = stencil_eval(s.wv, f.s2);
        set_column(G, f.baxis, 0.5 * (d1 + d2));
      }
      D += f.weight * m.omega * ddot(G, G);
    });
  }
  return D;
}

void Assembly::apply_dirichlet(FieldState& s) const {
  const Grid& g = *g_;
  const int nx = g.nodes_along(0);
  for (std::size_t id = 0; id < s.size(); ++id) {
    if (!fixedX_[id] && !fixedW_[id]) continue;
    const int i = int(id % nx), j = int(id / nx);
    const Vec3 X = g.coord(i, j);
    for (int a = 0; a < g.dim; ++a)
      for (int sd = 0; sd < 2; ++sd) {
        if (!g.on_boundary(i, j, a, sd)) continue;
        const ChannelBc& cx = bc_->at(a, sd, 0);
        if (cx.kind == BcKind::Dirichlet) {
          s.x[id] = dirichlet_value(cx, X);
          s.v[id] = Vec3{};
        }
        const ChannelBc& cw = bc_->at(a, sd, 1);
        if (cw.kind == BcKind::Dirichlet) {
          s.w[id] = dirichlet_value(cw, X);
          s.wv[id] = Vec3{};
        }
      }
  }
}

std::pair<double, double> Assembly::residual_norms(const FieldState& s) const {
  ForceField f;
  forces(s, f);
  double rp = 0.0, rw = 0.0;
  for (std::size_t id = 0; id < s.size(); ++id) {
    if (!fixedX_[id]) rp = std::max(rp, norm(f.fx[id]) / vol_[id]);
    if (!fixedW_[id]) rw = std::max(rw, norm(f.fw[id]) / vol_[id]);
  }
  return {rp, rw};
}

// ---------------------------------------------------------------------------
// integrators
// ---------------------------------------------------------------------------

namespace {

void half_kick(FieldState& s, const Assembly& a, const ForceField& f, double hdt,
               bool phason) {
  const double rho0 = a.model().rho0;
  const double rhoBar = a.model().rhoBar;
  const auto& vol = a.node_volume();
  for (std::size_t id = 0; id < s.size(); ++id) {
    if (!a.fixed_phonon(id)) s.v[id] += (hdt / (rho0 * vol[id])) * f.fx[id];
    if (phason && !a.fixed_phason(id))
      s.wv[id] += (hdt / (rhoBar * vol[id])) * f.fw[id];
  }
}

void drift(FieldState& s, const Assembly& a, double dt, bool phason) {
  for (std::size_t id = 0; id < s.size(); ++id) {
    if (!a.fixed_phonon(id)) s.x[id] += dt * s.v[id];
    if (phason && !a.fixed_phason(id)) s.w[id] += dt * s.wv[id];
  }
}

// matrix-free CG for the SPD phason-rate / semi-implicit systems
template <typename Op>
void cg_solve(const Assembly& a, Op&& applyA, const std::vector<Vec3>& rhs,
              std::vector<Vec3>& u, double tol, int maxIter) {
  const std::size_t n = rhs.size();
  std::vector<Vec3> r(n), p(n), Ap(n);
  applyA(u, Ap);
  double rr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = a.fixed_phason(i) ? Vec3{} : rhs[i] - Ap[i];
    p[i] = r[i];
    rr += norm2(r[i]);
  }
  const double rr0 = rr;
  if (rr0 == 0.0) return;
  for (int it = 0; it < maxIter; ++it) {
    applyA(p, Ap);
    double pAp = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!a.fixed_phason(i)) pAp += dot(p[i], Ap[i]);
    if (pAp <= 0.0) break;
    const double alpha = rr / pAp;
    double rrNew = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (a.fixed_phason(i)) continue;
      u[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
      rrNew += norm2(r[i]);
    }
    if (rrNew <= tol * tol * rr0) return;
    const double beta = rrNew / rr;
    rr = rrNew;
    for (std::size_t i = 0; i < n; ++i)
      if (!a.fixed_phason(i)) p[i] = r[i] + beta * p[i];
  }
}

// solve (cstar vol I + omega flux-operator) wdot = fw for the phason rate
void solve_phason_rate(const Assembly& a, const std::vector<Vec3>& fw,
                       std::vector<Vec3>& wdot) {
  const MaterialModel& m = a.model();
  const auto& vol = a.node_volume();
  const std::size_t n = fw.size();
  if (m.omega <= 0.0) {
    if (m.hasCstarMatrix) {
      const Mat3 cinv = det_inv(m.cstarMatrix).second;
      for (std::size_t i = 0; i < n; ++i)
        wdot[i] = a.fixed_phason(i) ? Vec3{} : cinv * (fw[i] / vol[i]);
    } else {
      for (std::size_t i = 0; i < n; ++i)
        wdot[i] = a.fixed_phason(i) ? Vec3{} : fw[i] / (m.cstarScalar * vol[i]);
    }
    return;
  }
  auto applyA = [&](const std::vector<Vec3>& u, std::vector<Vec3>& out) {
    out.assign(n, Vec3{});
    a.viscous_flux_forces(u, out);  // = -omega L u as a force; flip sign below
    for (std::size_t i = 0; i < n; ++i) {
      if (a.fixed_phason(i)) {
        out[i] = Vec3{};
        continue;
      }
      Vec3 lhs = -1.0 * out[i];
      if (m.hasCstarMatrix)
        lhs += vol[i] * (m.cstarMatrix * u[i]);
      else
        lhs += vol[i] * m.cstarScalar * u[i];
      out[i] = lhs;
    }
  };
  for (std::size_t i = 0; i < n; ++i) wdot[i] = Vec3{};
  cg_solve(a, applyA, fw, wdot, 1e-12, 2000);
}

}  // namespace

void step_conservative(FieldState& s, const Assembly& a, double dt) {
  const MaterialModel& m = a.model();
  if (is_iq(m.kind) || m.rhoBar <= 0.0)
    throw Error("step_conservative needs phason inertia (IIC kind)");
  if (m.cstarScalar != 0.0 || m.hasCstarMatrix || m.omega != 0.0 || m.customCstar)
    throw Error("step_conservative is for models without viscous coefficients");
  if (dt > a.dt_bound_hyperbolic())
    throw StabilityViolation("dt " + std::to_string(dt) + " exceeds bound " +
                             std::to_string(a.dt_bound_hyperbolic()));
  ForceField f;
  a.forces(s, f);
  half_kick(s, a, f, 0.5 * dt, true);
  drift(s, a, dt, true);
  a.apply_dirichlet(s);
  a.forces(s, f);
  half_kick(s, a, f, 0.5 * dt, true);
  s.t += dt;
}

void step_dissipative(FieldState& s, const Assembly& a, double dt,
                      Integrator integrator) {
  const MaterialModel& m = a.model();
  ForceField f;
  if (m.rhoBar <= 0.0) {
    // overdamped phason channel (IQ): cstar wdot = Div(S + omega grad wdot)
    if (m.cstar_min() <= 0.0 && m.omega <= 0.0)
      throw Error("dissipative phason evolution needs cstar > 0 (or omega > 0)");
    if (m.alpha > 0.0 && m.cstar_min() <= 0.0)
      throw Error("a local self-force (alpha > 0) relaxes through cstar; "
                  "cstar must be positive");
    const bool semi = integrator == Integrator::SemiImplicitPhasonDiffusion;
    if (!semi && dt > a.dt_bound_parabolic())
      throw StabilityViolation("dt exceeds the parabolic bound " +
                               std::to_string(a.dt_bound_parabolic()));
    if (dt > a.dt_bound_hyperbolic())
      throw StabilityViolation("dt exceeds the hyperbolic bound of the phonon "
                               "channel");
    // phonon half kick + drift
    a.forces(s, f);
    half_kick(s, a, f, 0.5 * dt, false);
    drift(s, a, dt, false);
    a.apply_dirichlet(s);
    a.forces(s, f);
    const std::size_t n = s.size();
    if (!semi) {
      std::vector<Vec3> wdot(n);
      solve_phason_rate(a, f.fw, wdot);
      for (std::size_t i = 0; i < n; ++i)
        if (!a.fixed_phason(i)) s.w[i] += dt * wdot[i];
      s.wv = wdot;
    } else {
      // backward Euler on the elastic term: solve for dw in
      // (cstar vol - omega L - dt dF/dw) dw = dt fw(x, w)
      if (m.kind != ModelKind::IQQuadratic && m.kind != ModelKind::IICQuadratic)
        throw Error("semi-implicit diffusion requires a quadratic kind");
      const auto& vol = a.node_volume();
      FieldState probe = s;
      ForceField f2;
      auto applyA = [&](const std::vector<Vec3>& u, std::vector<Vec3>& out) {
        out.assign(n, Vec3{});
        a.viscous_flux_forces(u, out);
        for (std::size_t i = 0; i < n; ++i) probe.w[i] = s.w[i] + u[i];
        a.forces(probe, f2);
        for (std::size_t i = 0; i < n; ++i) {
          if (a.fixed_phason(i)) {
            out[i] = Vec3{};
            continue;
          }
          Vec3 lhs = -1.0 * out[i];  // +omega L u
          if (m.hasCstarMatrix)
            lhs += vol[i] * (m.cstarMatrix * u[i]);
          else
            lhs += vol[i] * m.cstarScalar * u[i];
          lhs -= dt * (f2.fw[i] - f.fw[i]);  // -dt (dfw/dw) u, exact for quadratic
          out[i] = lhs;
        }
      };
      std::vector<Vec3> rhs(n), dw(n, Vec3{});
      for (std::size_t i = 0; i < n; ++i)
        rhs[i] = a.fixed_phason(i) ? Vec3{} : dt * f.fw[i];
      cg_solve(a, applyA, rhs, dw, 1e-12, 4000);
      for (std::size_t i = 0; i < n; ++i) {
        if (a.fixed_phason(i)) continue;
        s.w[i] += dw[i];
        s.wv[i] = dw[i] / dt;
      }
    }
    a.apply_dirichlet(s);
    a.forces(s, f);
    half_kick(s, a, f, 0.5 * dt, false);
    s.t += dt;
    return;
  }

  // inertial phason channel with friction: symmetric exact-decay split
  if (integrator != Integrator::SplitVerletFriction)
    throw Error("inertial dissipative stepping uses split_verlet_friction");
  if (m.hasCstarMatrix || m.customCstar)
    throw Error("split_verlet_friction supports the scalar cstar path only");
  if (dt > a.dt_bound_hyperbolic())
    throw StabilityViolation("dt exceeds the hyperbolic bound");
  const double decay = std::exp(-m.cstarScalar * dt / (2.0 * m.rhoBar));
  const std::size_t n = s.size();
  auto friction = [&] {
    for (std::size_t i = 0; i < n; ++i)
      if (!a.fixed_phason(i)) s.wv[i] *= decay;
  };
  auto forces_with_viscous_flux = [&](ForceField& out) {
    a.forces(s, out);
    if (m.omega > 0.0) a.viscous_flux_forces(s.wv, out.fw);
  };
  friction();
  forces_with_viscous_flux(f);
  half_kick(s, a, f, 0.5 * dt, true);
  drift(s, a, dt, true);
  a.apply_dirichlet(s);
  forces_with_viscous_flux(f);
  half_kick(s, a, f, 0.5 * dt, true);
  friction();
  s.t += dt;
}

double total_energy(const FieldState& s, const Assembly& a) {
  const MaterialModel& m = a.model();
  const auto& vol = a.node_volume();
  double T = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    T += 0.5 * vol[i] * (m.rho0 * norm2(s.v[i]) + m.rhoBar * norm2(s.wv[i]));
  return T + a.potential_energy(s);
}

Vec3 total_linear_momentum(const FieldState& s, const Assembly& a) {
  Vec3 p{};
  const auto& vol = a.node_volume();
  for (std::size_t i = 0; i < s.size(); ++i)
    p += a.model().rho0 * vol[i] * s.v[i];
  return p;
}

Vec3 total_phason_momentum(const FieldState& s, const Assembly& a) {
  Vec3 mu{};
  const auto& vol = a.node_volume();
  for (std::size_t i = 0; i < s.size(); ++i)
    mu += a.model().rhoBar * vol[i] * s.wv[i];
  return mu;
}

}  // namespace qld
