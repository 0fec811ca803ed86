#include "qld/boundary.hpp"

#include "qld/errors.hpp"

namespace qld {

BoundaryConditions BoundaryConditions::periodic_all(const Grid& g) {
  BoundaryConditions bc;
  for (int a = 0; a < 2; ++a)
    for (int s = 0; s < 2; ++s)
      for (int c = 0; c < 2; ++c)
        if (a < g.dim && g.periodic[a]) bc.side[a][s][c].kind = BcKind::Periodic;
  return bc;
}

BoundaryConditions BoundaryConditions::natural_all(const Grid& g) {
  BoundaryConditions bc = periodic_all(g);
  // bounded sides keep the default zero traction
  return bc;
}

void BoundaryConditions::validate(const Grid& g) const {
  for (int a = 0; a < g.dim; ++a)
    for (int s = 0; s < 2; ++s)
      for (int c = 0; c < 2; ++c) {
        const bool per = side[a][s][c].kind == BcKind::Periodic;
        if (per != g.periodic[a])
          throw Error("boundary kind disagrees with grid periodicity on axis " +
                      std::to_string(a));
        if (side[a][s][c].kind == BcKind::Potential && side[a][s][c].stiffness < 0.0)
          throw Error("boundary potential stiffness must be non-negative");
      }
}

bool BoundaryConditions::has_dirichlet(int channel, const Grid& g) const {
  for (int a = 0; a < g.dim; ++a)
    for (int s = 0; s < 2; ++s)
      if (side[a][s][channel].kind == BcKind::Dirichlet) return true;
  return false;
}

}  // namespace qld
