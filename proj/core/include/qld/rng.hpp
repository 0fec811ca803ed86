#pragma once

// Counter-based deterministic random numbers (splitmix64 finalizer applied to
// seed/counter pairs).  Every random draw in the project goes through this so
// that a scenario with a fixed seed reproduces byte-identical output on any
// platform; no libstdc++ distribution is involved.

#include <cstdint>
#include <cmath>

#include "qld/algebra.hpp"

namespace qld {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix64(seed ^ (0xa76f3d5c9b1e8f02ULL * (stream + 1)))) {}

  std::uint64_t next_u64() { return mix64(state_ += 0x9e3779b97f4a7c15ULL); }

  /// uniform in [0, 1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// uniform in [a, b)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// standard normal via Box-Muller (deterministic, no cached spare)
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  Vec3 vec3(double scale = 1.0) {
    return {scale * normal(), scale * normal(), scale * normal()};
  }

  Mat3 mat3(double scale = 1.0) {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m.a[i] = scale * normal();
    return m;
  }

  /// uniform rotation (random axis, uniform angle in [0, pi])
  Mat3 rotation_matrix() {
    Vec3 ax = vec3();
    while (norm(ax) < 1e-12) ax = vec3();
    return rotation(ax / norm(ax), uniform(0.0, 3.141592653589793238));
  }

 private:
  std::uint64_t state_;
};

}  // namespace qld
