#include "doctest.h"
#include "oracles.hpp"
#include "qld/algebra.hpp"
#include "qld/rng.hpp"

using namespace qld;

TEST_CASE("det_inv: identity and diagonal") {
  auto [d, inv] = det_inv(Mat3::identity());
  CHECK(d == doctest::Approx(1.0));
  CHECK(norm(inv - Mat3::identity()) == doctest::Approx(0.0));

  auto [d2, inv2] = det_inv(Mat3::diag(2, 3, 4));
  CHECK(d2 == doctest::Approx(24.0));
  CHECK(norm(inv2 - Mat3::diag(0.5, 1.0 / 3.0, 0.25)) < 1e-15);
}

TEST_CASE("det_inv matches the cofactor/adjugate oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Mat3 m = Mat3::identity() + rng.mat3(0.4);
    if (std::abs(oracle::det_cofactor(m)) < 0.05) continue;  // keep well-conditioned
    auto [d, inv] = det_inv(m);
    CHECK(oracle::rel_err(d, oracle::det_cofactor(m)) < 1e-12);
    CHECK(norm(inv - oracle::inverse_adjugate(m)) < 1e-12 * norm(inv));
    CHECK(norm(m * inv - Mat3::identity()) < 1e-12);
  }
}

TEST_CASE("det_inv rejects singular input") {
  Mat3 m;  // zero
  CHECK_THROWS_AS(det_inv(m), SingularMatrix);
  Mat3 r1;  // rank one
  r1 = outer(Vec3{1, 2, 3}, Vec3{4, 5, 6});
  CHECK_THROWS_AS(det_inv(r1), SingularMatrix);
}

TEST_CASE("det is multiplicative on random well-conditioned pairs") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat3 a = Mat3::identity() + rng.mat3(0.3);
    const Mat3 b = Mat3::identity() + rng.mat3(0.3);
    CHECK(oracle::rel_err(det(a * b), det(a) * det(b)) < 1e-12);
  }
}

TEST_CASE("skw annihilates symmetric input and is idempotent on its range") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat3 m = rng.mat3();
    CHECK(norm(skw(sym(m))) == 0.0);
    const Mat3 w = skw(m);
    CHECK(norm(skw(w) - w) == 0.0);
    // componentwise reassembly
    CHECK(norm(skw(m) + sym(m) - m) < 1e-15 * (1.0 + norm(m)));
  }
}

TEST_CASE("skw of a dyad antisymmetrizes it") {
  const Vec3 e{1, 2, -1}, f{0.5, -3, 2};
  CHECK(norm(skw(outer(e, f)) - 0.5 * (outer(e, f) - outer(f, e))) == 0.0);
}

TEST_CASE("cross and axial") {
  CHECK(norm(cross(Vec3{1, 0, 0}, Vec3{0, 1, 0}) - Vec3{0, 0, 1}) == 0.0);

  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 q = rng.vec3();
    CHECK(norm(axial(cross_matrix(q)) - q) == 0.0);
    const Vec3 a = rng.vec3(), b = rng.vec3();
    // componentwise alternator oracle
    Vec3 c;
    c.x = a.y * b.z - a.z * b.y;
    c.y = a.z * b.x - a.x * b.z;
    c.z = a.x * b.y - a.y * b.x;
    CHECK(norm(cross(a, b) - c) == 0.0);
    CHECK(std::abs(dot(a, cross(a, b))) < 1e-14 * (1 + norm2(a)) * (1 + norm(b)));
    CHECK(norm(cross(a, b) + cross(b, a)) == 0.0);
  }
}

TEST_CASE("axial rejects non-skew input") {
  CHECK_THROWS_AS(axial(Mat3::diag(1, 1, 1)), NotSkew);
}

TEST_CASE("rotation matrices are orthogonal with det 1") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat3 q = rng.rotation_matrix();
    CHECK(norm(transpose(q) * q - Mat3::identity()) < 1e-14);
    CHECK(det(q) == doctest::Approx(1.0));
  }
}

TEST_CASE("tensor4 apply matches the naive quadruple loop") {
  Rng rng(17);
  Tensor4 t;
  for (auto& c : t.a) c = rng.normal();
  const Mat3 a = rng.mat3(), b = rng.mat3();
  CHECK(oracle::rel_err(ddot(a, apply(t, b)), oracle::quad_form_loops(t, a, b)) < 1e-13);
  // pair transpose swaps the arguments
  CHECK(oracle::rel_err(ddot(b, apply(transpose_pairs(t), a)),
                        oracle::quad_form_loops(t, a, b)) < 1e-13);
}
