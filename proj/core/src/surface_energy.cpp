#include "qld/surface_energy.hpp"

#include <cmath>

#include "qld/errors.hpp"

namespace qld {

void SurfaceEnergyModel::validate() const {
  if (kind == SurfaceKind::Constant) {
    if (phi0 < 0.0) throw Error("surface energy phi0 must be non-negative");
    return;
  }
  if (phi0 < 0.0) throw Error("surface energy phi0 must be non-negative");
  // phi0 (1 + eps (m.d)^2) over the unit sphere: minimum is phi0 min(1, 1+eps)
  if (phi0 * (1.0 + std::min(0.0, anisotropyEps)) < 0.0)
    throw Error("anisotropic surface energy dips below zero on the unit sphere");
  if (kF < 0.0 || kN < 0.0 || kW < 0.0)
    throw Error("surface moduli must be non-negative");
}

SurfaceEval surface_eval(const SurfaceEnergyModel& sem, const Vec3& m,
                         const Mat3& Fs, const Vec3& wAvg, const Mat3& Ns) {
  const double lm = norm(m);
  if (std::abs(lm - 1.0) > 1e-3)
    throw NonUnitNormal("surface normal must be a unit vector, |m| = " +
                        std::to_string(lm));

  SurfaceEval out;
  if (sem.kind == SurfaceKind::Constant) {
    out.phi = sem.phi0;
    return out;
  }

  const Vec3 n = m / lm;
  const Mat3 Pi = Mat3::identity() - outer(n, n);
  Vec3 d = sem.anisotropyAxis;
  const double ld = norm(d);
  d = (ld > 0.0) ? d / ld : Vec3{1, 0, 0};

  const double md = dot(n, d);
  const Mat3 FsP = Fs * Pi;
  const Mat3 NsP = Ns * Pi;

  out.phi = sem.phi0 * (1.0 + sem.anisotropyEps * md * md) +
            0.5 * sem.kF * ddot(FsP, FsP) + 0.5 * sem.kN * ddot(NsP, NsP) +
            0.5 * sem.kW * norm2(wAvg);

  out.T = -sem.kF * FsP;
  out.Ssurf = -sem.kN * NsP;
  out.zsurf = sem.kW * wAvg;

  // m-derivative: anisotropy term plus the projector chain through Pi(m);
  // everything is tangential because phi is 0-homogeneous in m.
  Vec3 g = 2.0 * sem.phi0 * sem.anisotropyEps * md * (Pi * d);
  g -= sem.kF * (Pi * (transpose(Fs) * (Fs * n)));
  g -= sem.kN * (Pi * (transpose(Ns) * (Ns * n)));
  out.dphi_dm = g / lm;
  return out;
}

}  // namespace qld
