#pragma once

// Deformation measures from discrete fields: F, grad w, Green strain, the
// additive/multiplicative phonon-phason decompositions, pushforwards, and the
// curl-curl compatibility diagnostics.

#include <utility>
#include <vector>

#include "qld/grid.hpp"

namespace qld {

/// Nodal derivative of a Vec3 field along an active axis: second-order central
/// at interior/periodic nodes, one-sided second-order at bounded ends.
Vec3 nodal_derivative(const std::vector<Vec3>& f, const Grid& g, int i, int j,
                      int axis);

/// F and grad w at every node.  Inactive columns of F are identity columns
/// (x_inactive = X_inactive); inactive columns of grad w are zero.  Throws
/// OrientationViolation if det F <= 0 anywhere.
std::vector<DeformationPoint> gradients(const FieldState& s, const Grid& g);

/// As gradients(), but with constant non-identity metrics attached.
std::vector<DeformationPoint> gradients(const FieldState& s, const Grid& g,
                                        const Mat3& gammaRef, const Mat3& gSpatial);

/// Green strain E = (F^T g F - gamma)/2.
inline Mat3 green_strain(const DeformationPoint& dp) {
  return 0.5 * (transpose(dp.F) * dp.gSpatial * dp.F - dp.gammaRef);
}

/// (F', F^ph) with F' = F + grad w and F^ph = I + (grad w) F^{-1};
/// satisfies F^ph F = F' to rounding.
std::pair<Mat3, Mat3> decompose(const DeformationPoint& dp);

/// grad_x of the spatial phason image: (grad w) F^{-1}.
Mat3 phason_pushforward(const DeformationPoint& dp);

/// Double curl over the referential indices: (curl T)_iC = e_CAB d_A T_iB
/// applied twice.  Identically zero (to rounding) for any tensor field built
/// by the commuting nodal difference stencils; a genuine probe for externally
/// supplied gradient data.
std::vector<Mat3> curl_curl(const std::vector<Mat3>& field, const Grid& g);

/// Saint-Venant incompatibility grad x T x grad (both curls on the
/// referential index pair); the operator that annihilates symmetric gradients.
std::vector<Mat3> incompatibility(const std::vector<Mat3>& field, const Grid& g);

/// Nodal norms of incompatibility(sym grad u) and curl_curl(grad w); in 1-D
/// both vanish by construction.
std::pair<std::vector<double>, std::vector<double>> compatibility_residual(
    const FieldState& s, const Grid& g);

}  // namespace qld
