// Microbenchmarks for the hot kernels: pointwise stress evaluation, the
// face-form force assembly, one conservative step, and jump sampling.

#include <benchmark/benchmark.h>

#include "qld/dynamics.hpp"
#include "qld/interface.hpp"
#include "qld/kinematics.hpp"
#include "qld/rng.hpp"

using namespace qld;

namespace {

MaterialModel coupled_model() {
  return MaterialModel::icosahedral(ModelKind::IICQuadratic, 1.0, 0.5, 1.0, 0.5,
                                    0.8, 0.2, 0.15);
}

Grid grid2d(int n) {
  Grid g;
  g.dim = 2;
  g.cells = {n, n};
  g.h = {1.0 / n, 1.0 / n};
  g.periodic = {true, true};
  return g;
}

FieldState wavy_state(const Grid& g) {
  FieldState s = FieldState::natural(g);
  for (std::size_t id = 0; id < s.size(); ++id) {
    const Vec3 X = g.coord(id);
    s.x[id].x += 2e-3 * std::sin(6.283185307179586 * X.x);
    s.w[id].y += 1e-3 * std::cos(6.283185307179586 * (X.x + X.y));
  }
  return s;
}

}  // namespace

static void BM_StressBundle(benchmark::State& state) {
  const MaterialModel m = coupled_model();
  Rng rng(1);
  DeformationPoint dp;
  dp.F = Mat3::identity() + rng.mat3(0.1);
  dp.gradW = rng.mat3(0.1);
  const Vec3 w = rng.vec3(0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stresses(m, dp, w));
  }
}
BENCHMARK(BM_StressBundle);

static void BM_StVenantStressBundle(benchmark::State& state) {
  const MaterialModel m = MaterialModel::isotropic_stvenant(1.0, 0.5, 1.0, 0.5,
                                                            0.8, 0.2);
  Rng rng(2);
  DeformationPoint dp;
  dp.F = Mat3::identity() + rng.mat3(0.1);
  dp.gradW = rng.mat3(0.1);
  const Vec3 w = rng.vec3(0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stresses(m, dp, w));
  }
}
BENCHMARK(BM_StVenantStressBundle);

static void BM_ForceAssembly(benchmark::State& state) {
  const Grid g = grid2d(int(state.range(0)));
  const MaterialModel m = coupled_model();
  const BoundaryConditions bc = BoundaryConditions::periodic_all(g);
  Assembly asmb(g, m, bc);
  const FieldState s = wavy_state(g);
  ForceField f;
  for (auto _ : state) {
    asmb.forces(s, f);
    benchmark::DoNotOptimize(f.fx.data());
  }
  state.SetItemsProcessed(state.iterations() * g.node_count());
}
BENCHMARK(BM_ForceAssembly)->Arg(32)->Arg(64);

static void BM_ConservativeStep(benchmark::State& state) {
  const Grid g = grid2d(int(state.range(0)));
  const MaterialModel m = coupled_model();
  const BoundaryConditions bc = BoundaryConditions::periodic_all(g);
  Assembly asmb(g, m, bc);
  FieldState s = wavy_state(g);
  const double dt = 0.2 * asmb.dt_bound_hyperbolic();
  for (auto _ : state) {
    step_conservative(s, asmb, dt);
    benchmark::DoNotOptimize(s.x.data());
  }
  state.SetItemsProcessed(state.iterations() * g.node_count());
}
BENCHMARK(BM_ConservativeStep)->Arg(32)->Arg(64);

static void BM_NodalGradients(benchmark::State& state) {
  const Grid g = grid2d(int(state.range(0)));
  const FieldState s = wavy_state(g);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gradients(s, g));
  }
  state.SetItemsProcessed(state.iterations() * g.node_count());
}
BENCHMARK(BM_NodalGradients)->Arg(64);

static void BM_JumpSampling(benchmark::State& state) {
  Grid g;
  g.dim = 2;
  g.cells = {64, 64};
  g.h = {1.0 / 64, 1.0 / 64};
  const MaterialModel m = coupled_model();
  const FieldState s = wavy_state(g);
  const NodalFields f = sample_bulk(s, g, m);
  InterfaceCurve c = InterfaceCurve::circle(Vec3{0.5, 0.5, 0}, 0.25, 200, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_jumps(f, g, c, 1.5 * g.h[0]));
  }
  state.SetItemsProcessed(state.iterations() * c.size());
}
BENCHMARK(BM_JumpSampling);

BENCHMARK_MAIN();
