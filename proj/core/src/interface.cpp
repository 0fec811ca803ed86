#include "qld/interface.hpp"

#include <cmath>

#include "qld/errors.hpp"
#include "qld/kinematics.hpp"

namespace qld {

namespace {

bool segments_intersect(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  auto orient = [](const Vec3& p, const Vec3& q, const Vec3& r) {
    const double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    return (v > 0.0) - (v < 0.0);
  };
  return orient(a, b, c) != orient(a, b, d) && orient(c, d, a) != orient(c, d, b) &&
         orient(a, b, c) * orient(a, b, d) != 0;
}

// circumradius of three points; exact for points on a circle
double circumradius(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double la = norm(b - c), lb = norm(a - c), lc = norm(a - b);
  const double cr2 = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  if (std::abs(cr2) < 1e-300) return 1e300;
  return la * lb * lc / (2.0 * std::abs(cr2));
}

}  // namespace

InterfaceCurve InterfaceCurve::circle(const Vec3& center, double radius,
                                      int nMarkers, double ftilde) {
  InterfaceCurve c;
  c.closed = true;
  c.ftilde = ftilde;
  c.X.resize(nMarkers);
  for (int k = 0; k < nMarkers; ++k) {
    const double th = 2.0 * 3.14159265358979324 * k / nMarkers;
    c.X[k] = center + Vec3{radius * std::cos(th), radius * std::sin(th), 0.0};
  }
  c.targetSpacing = 2.0 * 3.14159265358979324 * radius / nMarkers;
  c.update_geometry();
  return c;
}

InterfaceCurve InterfaceCurve::segment(const Vec3& a, const Vec3& b, int nMarkers,
                                       double ftilde) {
  InterfaceCurve c;
  c.closed = false;
  c.ftilde = ftilde;
  c.X.resize(nMarkers);
  for (int k = 0; k < nMarkers; ++k)
    c.X[k] = a + (double(k) / (nMarkers - 1)) * (b - a);
  c.targetSpacing = norm(b - a) / (nMarkers - 1);
  c.update_geometry();
  return c;
}

void InterfaceCurve::update_geometry() {
  const std::size_t n = X.size();
  if (n < 3) throw Error("interface needs at least 3 markers");
  if (!(ftilde > 0.0)) throw Error("kinetic coefficient ftilde must be positive");
  tangent.resize(n);
  normal.resize(n);
  ds.resize(n);
  kappa.resize(n);
  if (U.size() != n) U.assign(n, 0.0);
  if (G.size() != n) G.assign(n, 0.0);

  auto at = [&](std::ptrdiff_t k) -> const Vec3& {
    if (closed) return X[std::size_t((k % std::ptrdiff_t(n) + n) % n)];
    if (k < 0) k = 0;
    if (k >= std::ptrdiff_t(n)) k = std::ptrdiff_t(n) - 1;
    return X[std::size_t(k)];
  };

  for (std::size_t k = 0; k < n; ++k) {
    Vec3 d;
    if (!closed && k == 0)
      d = X[1] - X[0];
    else if (!closed && k == n - 1)
      d = X[n - 1] - X[n - 2];
    else
      d = at(std::ptrdiff_t(k) + 1) - at(std::ptrdiff_t(k) - 1);
    const double len = norm(d);
    if (len <= 0.0) throw Error("degenerate marker spacing");
    tangent[k] = d / len;
    ds[k] = 0.5 * len;
    normal[k] = Vec3{tangent[k].y, -tangent[k].x, 0.0};

    // curvature: circumscribed circle through three consecutive markers;
    // a left turn (ccw curve, outward normal) is a convex spot, kappa < 0
    const Vec3 &p0 = at(std::ptrdiff_t(k) - 1), &p1 = X[k],
               &p2 = at(std::ptrdiff_t(k) + 1);
    const double R = circumradius(p0, p1, p2);
    const double turn = (p1.x - p0.x) * (p2.y - p1.y) - (p1.y - p0.y) * (p2.x - p1.x);
    const double sgn = (turn > 0.0) ? 1.0 : ((turn < 0.0) ? -1.0 : 0.0);
    kappa[k] = (R >= 1e300) ? 0.0 : -sgn / R;
  }

  if (targetSpacing > 0.0) {
    const std::size_t nseg = closed ? n : n - 1;
    for (std::size_t k = 0; k < nseg; ++k) {
      const double L = norm(at(std::ptrdiff_t(k) + 1) - X[k]);
      if (L < 0.25 * targetSpacing || L > 2.5 * targetSpacing)
        throw Error("marker spacing left the admissible band");
    }
  }

  const std::size_t nseg = closed ? n : n - 1;
  for (std::size_t i = 0; i + 1 < nseg; ++i)
    for (std::size_t j = i + 2; j < nseg; ++j) {
      if (closed && i == 0 && j == nseg - 1) continue;  // shared endpoint
      if (segments_intersect(X[i], at(std::ptrdiff_t(i) + 1), X[j],
                             at(std::ptrdiff_t(j) + 1)))
        throw SelfIntersection("interface markers self-intersect");
    }
}

void InterfaceCurve::redistribute() {
  const std::size_t n = X.size();
  if (targetSpacing <= 0.0) return;
  const std::size_t nseg = closed ? n : n - 1;
  std::vector<double> s(nseg + 1, 0.0);
  for (std::size_t k = 1; k <= nseg; ++k)
    s[k] = s[k - 1] + norm(X[k % n] - X[k - 1]);
  const double total = s[nseg];
  std::size_t m = std::max<std::size_t>(8, std::size_t(std::llround(total / targetSpacing)));
  if (!closed) m += 1;

  // Catmull-Rom through the old markers; chordwise-linear resampling would
  // bias a shrinking closed curve inward at every pass
  auto point = [&](std::ptrdiff_t k) -> const Vec3& {
    if (closed) return X[std::size_t((k % std::ptrdiff_t(n) + n) % n)];
    if (k < 0) k = 0;
    if (k >= std::ptrdiff_t(n)) k = std::ptrdiff_t(n) - 1;
    return X[std::size_t(k)];
  };
  std::vector<Vec3> Y(m);
  const double step = closed ? total / m : total / (m - 1);
  std::size_t seg = 1;
  for (std::size_t k = 0; k < m; ++k) {
    const double sk = std::min(k * step, total);
    while (seg < nseg && s[seg] < sk) ++seg;
    const double t = (sk - s[seg - 1]) / std::max(1e-300, s[seg] - s[seg - 1]);
    const Vec3 &p0 = point(std::ptrdiff_t(seg) - 2), &p1 = point(std::ptrdiff_t(seg) - 1),
               &p2 = point(std::ptrdiff_t(seg)), &p3 = point(std::ptrdiff_t(seg) + 1);
    const double t2 = t * t, t3 = t2 * t;
    Y[k] = 0.5 * ((2.0 * t2 - t3 - t) * p0 + (2.0 + 3.0 * t3 - 5.0 * t2) * p1 +
                  (t + 4.0 * t2 - 3.0 * t3) * p2 + (t3 - t2) * p3);
  }
  X = std::move(Y);
  U.assign(X.size(), 0.0);
  G.assign(X.size(), 0.0);
}

NodalFields sample_bulk(const FieldState& s, const Grid& g,
                        const MaterialModel& m) {
  NodalFields f;
  const auto dps = gradients(s, g);
  const std::size_t n = g.node_count();
  f.F.resize(n);
  f.gradW.resize(n);
  f.P.resize(n);
  f.S.resize(n);
  f.eshelby.resize(n);
  f.e.resize(n);
  f.xdot = s.v;
  f.wdot = s.wv;
  f.w = s.w;
  for (std::size_t id = 0; id < n; ++id) {
    f.F[id] = dps[id].F;
    f.gradW[id] = dps[id].gradW;
    const StressBundle b = stresses(m, dps[id], s.w[id]);
    f.P[id] = b.P;
    f.S[id] = b.S;
    f.eshelby[id] = b.eshelby;
    f.e[id] = b.e;
  }
  return f;
}

namespace {

struct Interp {
  std::size_t id[4];
  double w[4];

  Interp(const Grid& grid, const Vec3& Y) {
    double fx[2] = {0.0, 0.0};
    int i0[2] = {0, 0};
    for (int a = 0; a < grid.dim; ++a) {
      const double ya = (a == 0 ? Y.x : Y.y);
      double t = (ya - grid.origin[a]) / grid.h[a];
      if (grid.periodic[a]) {
        const int nc = grid.cells[a];
        t = std::fmod(t, double(nc));
        if (t < 0.0) t += nc;
      } else if (t < -1e-12 || t > grid.cells[a] + 1e-12) {
        throw OffsetOutsideDomain("interface offset point left the grid");
      }
      int i = int(std::floor(t));
      if (!grid.periodic[a]) i = std::min(std::max(i, 0), grid.cells[a] - 1);
      i0[a] = i;
      fx[a] = t - i;
    }
    auto wrap = [&](int i, int a) {
      return grid.periodic[a] ? (i % grid.nodes_along(a)) : i;
    };
    if (grid.dim == 1) {
      id[0] = grid.id(wrap(i0[0], 0), 0);
      id[1] = grid.id(wrap(i0[0] + 1, 0), 0);
      w[0] = 1.0 - fx[0];
      w[1] = fx[0];
      id[2] = id[3] = id[0];
      w[2] = w[3] = 0.0;
    } else {
      id[0] = grid.id(wrap(i0[0], 0), wrap(i0[1], 1));
      id[1] = grid.id(wrap(i0[0] + 1, 0), wrap(i0[1], 1));
      id[2] = grid.id(wrap(i0[0], 0), wrap(i0[1] + 1, 1));
      id[3] = grid.id(wrap(i0[0] + 1, 0), wrap(i0[1] + 1, 1));
      w[0] = (1 - fx[0]) * (1 - fx[1]);
      w[1] = fx[0] * (1 - fx[1]);
      w[2] = (1 - fx[0]) * fx[1];
      w[3] = fx[0] * fx[1];
    }
  }

  Mat3 eval(const std::vector<Mat3>& f) const {
    Mat3 r;
    for (int k = 0; k < 4; ++k)
      if (w[k] != 0.0) r += w[k] * f[id[k]];
    return r;
  }
  Vec3 eval(const std::vector<Vec3>& f) const {
    Vec3 r{};
    for (int k = 0; k < 4; ++k)
      if (w[k] != 0.0) r += w[k] * f[id[k]];
    return r;
  }
  double eval(const std::vector<double>& f) const {
    double r = 0.0;
    for (int k = 0; k < 4; ++k)
      if (w[k] != 0.0) r += w[k] * f[id[k]];
    return r;
  }
};

}  // namespace

JumpSample sample_jumps(const NodalFields& f, const Grid& g,
                        const InterfaceCurve& c, double eps) {
  const double hMin = std::min(g.h[0], g.h[g.dim - 1]);
  if (eps < 1.5 * hMin - 1e-12)
    throw Error("jump sampling offset must be at least 1.5 h");
  JumpSample js;
  js.eps = eps;
  js.markers.resize(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const Vec3 m = c.normal[k];
    const Interp plus(g, c.X[k] + eps * m);
    const Interp minus(g, c.X[k] - eps * m);
    MarkerJump& mk = js.markers[k];
    mk.m = m;
    mk.U = k < c.U.size() ? c.U[k] : 0.0;

    auto take = [&](const auto& field, auto& jump, auto& avg) {
      const auto ap = plus.eval(field);
      const auto am = minus.eval(field);
      jump = ap - am;
      avg = 0.5 * (ap + am);
    };
    take(f.F, mk.Fj, mk.Fa);
    take(f.gradW, mk.Gj, mk.Ga);
    take(f.P, mk.Pj, mk.Pa);
    take(f.S, mk.Sj, mk.Sa);
    take(f.eshelby, mk.PPj, mk.PPa);
    take(f.xdot, mk.xdj, mk.xda);
    take(f.wdot, mk.wdj, mk.wda);
    take(f.w, mk.wj, mk.wa);
    take(f.e, mk.ej, mk.ea);

    // pointwise products, so [ab] = [a]<b> + <a>[b] holds identically
    const Mat3 Gp = plus.eval(f.gradW), Gm = minus.eval(f.gradW);
    const Vec3 wdp = plus.eval(f.wdot), wdm = minus.eval(f.wdot);
    const Vec3 prodP = transpose(Gp) * wdp, prodM = transpose(Gm) * wdm;
    mk.gwTwd_j = prodP - prodM;
    mk.gwTwd_a = 0.5 * (prodP + prodM);
    mk.wd2_j = norm2(wdp) - norm2(wdm);
    mk.wd2_a = 0.5 * (norm2(wdp) + norm2(wdm));
    const Mat3 Fp = plus.eval(f.F), Fmm = minus.eval(f.F);
    mk.Fm2_j = norm2(Fp * m) - norm2(Fmm * m);
    mk.Fm2_a = 0.5 * (norm2(Fp * m) + norm2(Fmm * m));

    const Mat3 Pi = Mat3::identity() - outer(m, m);
    mk.Fsurf = mk.Fa * Pi;
    mk.Nsurf = mk.Ga * Pi;
  }
  return js;
}

std::vector<CoherenceResidual> coherence_residual(const JumpSample& js) {
  std::vector<CoherenceResidual> out(js.markers.size());
  for (std::size_t k = 0; k < js.markers.size(); ++k) {
    const MarkerJump& mk = js.markers[k];
    const Mat3 Pi = Mat3::identity() - outer(mk.m, mk.m);
    out[k].tangential = norm(mk.Fj * Pi);
    out[k].kinematic = norm(mk.xdj + mk.U * (mk.Fj * mk.m));
  }
  return out;
}

namespace {

template <typename T>
const T& wrap_at(const std::vector<T>& v, std::ptrdiff_t k, bool closed) {
  const std::ptrdiff_t n = std::ptrdiff_t(v.size());
  if (closed) return v[std::size_t((k % n + n) % n)];
  if (k < 0) k = 0;
  if (k >= n) k = n - 1;
  return v[std::size_t(k)];
}

}  // namespace

std::vector<Vec3> surface_divergence(const InterfaceCurve& c,
                                     const std::vector<Mat3>& A) {
  const std::size_t n = c.size();
  std::vector<Vec3> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::ptrdiff_t lo = std::ptrdiff_t(k) - 1, hi = std::ptrdiff_t(k) + 1;
    if (!c.closed && k == 0) lo = 0;
    if (!c.closed && k == n - 1) hi = std::ptrdiff_t(n) - 1;
    const double len = norm(wrap_at(c.X, hi, c.closed) - wrap_at(c.X, lo, c.closed));
    const Mat3 dA = (1.0 / len) * (wrap_at(A, hi, c.closed) - wrap_at(A, lo, c.closed));
    out[k] = dA * c.tangent[k];
  }
  return out;
}

std::vector<double> surface_divergence(const InterfaceCurve& c,
                                       const std::vector<Vec3>& a) {
  const std::size_t n = c.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::ptrdiff_t lo = std::ptrdiff_t(k) - 1, hi = std::ptrdiff_t(k) + 1;
    if (!c.closed && k == 0) lo = 0;
    if (!c.closed && k == n - 1) hi = std::ptrdiff_t(n) - 1;
    const double len = norm(wrap_at(c.X, hi, c.closed) - wrap_at(c.X, lo, c.closed));
    const Vec3 da = (1.0 / len) * (wrap_at(a, hi, c.closed) - wrap_at(a, lo, c.closed));
    out[k] = dot(da, c.tangent[k]);
  }
  return out;
}

namespace {

struct SurfaceTerms {
  std::vector<Vec3> divT, divS, zs;
  std::vector<double> divc, CtanL;
};

SurfaceTerms surface_terms(const JumpSample& js, const InterfaceCurve& c) {
  SurfaceTerms st;
  const std::size_t n = c.size();
  st.divT.assign(n, Vec3{});
  st.divS.assign(n, Vec3{});
  st.divc.assign(n, 0.0);
  st.CtanL.assign(n, 0.0);
  st.zs.assign(n, Vec3{});
  if (!c.sem.has_value()) return st;
  std::vector<Mat3> T(n), Ss(n), Ctan(n);
  std::vector<Vec3> cshear(n);
  for (std::size_t k = 0; k < n; ++k) {
    const MarkerJump& mk = js.markers[k];
    const SurfaceEval ev = surface_eval(*c.sem, c.normal[k], mk.Fsurf, mk.wa, mk.Nsurf);
    T[k] = ev.T;
    Ss[k] = ev.Ssurf;
    st.zs[k] = ev.zsurf;
    const Mat3 Pi = Mat3::identity() - outer(c.normal[k], c.normal[k]);
    Ctan[k] = ev.phi * Pi - transpose(mk.Fsurf) * ev.T - transpose(mk.Nsurf) * ev.Ssurf;
    cshear[k] = -1.0 * ev.dphi_dm - transpose(ev.T) * (mk.Fa * c.normal[k]) -
                transpose(ev.Ssurf) * (mk.Ga * c.normal[k]);
  }
  st.divT = surface_divergence(c, T);
  st.divS = surface_divergence(c, Ss);
  st.divc = surface_divergence(c, cshear);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 t = c.tangent[k];
    st.CtanL[k] = c.kappa[k] * dot(t, Ctan[k] * t);  // L = kappa t x t
  }
  return st;
}

}  // namespace

std::vector<InterfacialResidual> interfacial_residuals(const JumpSample& js,
                                                       const InterfaceCurve& c,
                                                       double rho0, double rhoBar) {
  const SurfaceTerms st = surface_terms(js, c);
  const std::size_t n = c.size();
  std::vector<InterfacialResidual> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const MarkerJump& mk = js.markers[k];
    out[k].phonon = mk.Pj * mk.m + st.divT[k] + rho0 * mk.U * mk.xdj;
    out[k].phason = mk.Sj * mk.m + st.divS[k] - st.zs[k] + rhoBar * mk.U * mk.wdj;
    out[k].config = dot(mk.m, mk.PPj * mk.m) + st.CtanL[k] + st.divc[k] -
                    rhoBar * mk.U * dot(mk.gwTwd_j, mk.m) -
                    0.5 * rhoBar * mk.wd2_j + 0.5 * rho0 * mk.U * mk.U * mk.Fm2_j;
  }
  return out;
}

namespace {

// one explicit update of the kinetic relation; geometry must be current
void kinetic_substep(InterfaceCurve& c, const JumpSample& js, double dt,
                     double rho0, double rhoBar) {
  const std::size_t n = c.size();
  const SurfaceTerms st = surface_terms(js, c);
  std::vector<double> Unew(n), Gnew(n);
  for (std::size_t k = 0; k < n; ++k) {
    const MarkerJump& mk = js.markers[k];
    const double G = dot(mk.m, mk.PPj * mk.m) + st.CtanL[k] + st.divc[k] -
                     0.5 * rhoBar * mk.wd2_j;
    // ftilde U = G + a U^2 + mu U  with a = rho0/2 [|Fm|^2],
    // mu = -rhoBar [gradW^T wdot].m ; rewritten a U^2 + b U + G = 0
    const double a = 0.5 * rho0 * mk.Fm2_j;
    const double b = -(c.ftilde + rhoBar * dot(mk.gwTwd_j, mk.m));
    double Uk;
    if (std::abs(a) < 1e-14 * std::abs(b)) {
      Uk = -G / b;  // quasi-static branch
    } else {
      const double disc = b * b - 4.0 * a * G;
      if (disc < 0.0)
        throw NoRealRoot("interface kinetic relation has no real root", disc);
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
      const double r1 = q / a;
      const double r2 = (q != 0.0) ? G / q : 0.0;
      Uk = (std::abs(r1) < std::abs(r2)) ? r1 : r2;
      if (std::abs(std::abs(r1) - std::abs(r2)) < 1e-14 * (std::abs(r1) + 1.0))
        Uk = (G >= 0.0 ? 1.0 : -1.0) * std::abs(Uk);
    }
    Unew[k] = Uk;
    Gnew[k] = G;
  }
  for (std::size_t k = 0; k < n; ++k) c.X[k] += dt * Unew[k] * c.normal[k];
  c.U = Unew;
  c.G = Gnew;
}

}  // namespace

void evolve_interface(InterfaceCurve& c, const JumpSample* js, double dt,
                      double rho0, double rhoBar) {
  const std::size_t n = c.size();
  if (!(c.ftilde > 0.0)) throw Error("kinetic coefficient ftilde must be positive");

  JumpSample zero;
  if (!js) {
    zero.markers.resize(n);
    for (std::size_t k = 0; k < n; ++k) zero.markers[k].m = c.normal[k];
    js = &zero;
  }
  if (js->markers.size() != n)
    throw Error("jump sample and curve marker counts disagree");

  // marker CFL of the curvature feedback: motion by curvature diffuses
  // sawtooth marker modes at rate ~ 8 phi / (ftilde ds^2), so the explicit
  // update is substepped to dt_sub <= ftilde ds_min^2 / (8 phi_max)
  int nSub = 1;
  if (c.sem.has_value()) {
    double phiMax = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const MarkerJump& mk = js->markers[k];
      phiMax = std::max(phiMax,
                        surface_eval(*c.sem, c.normal[k], mk.Fsurf, mk.wa, mk.Nsurf).phi);
    }
    double dsMin = 1e300;
    for (std::size_t k = 0; k < n; ++k) dsMin = std::min(dsMin, 2.0 * c.ds[k]);
    if (phiMax > 0.0) {
      const double bound = c.ftilde * dsMin * dsMin / (8.0 * phiMax);
      nSub = std::max(1, int(std::ceil(dt / bound)));
      if (nSub > 1000000) throw Error("interface substepping exploded; reduce dt");
    }
  }

  const double dts = dt / nSub;
  for (int sub = 0; sub < nSub; ++sub) {
    kinetic_substep(c, *js, dts, rho0, rhoBar);
    if (sub + 1 < nSub) c.update_geometry();
  }

  // keep markers in the spacing band; tangential drift is removed because the
  // motion is purely normal and resampling is arclength-uniform
  const std::size_t nseg = c.closed ? n : n - 1;
  bool needResample = false;
  for (std::size_t k = 0; k < nseg && !needResample; ++k) {
    const double L = norm(wrap_at(c.X, std::ptrdiff_t(k) + 1, c.closed) - c.X[k]);
    if (L < 0.75 * c.targetSpacing || L > 1.5 * c.targetSpacing) needResample = true;
  }
  if (needResample) c.redistribute();
  c.update_geometry();
}

}  // namespace qld
