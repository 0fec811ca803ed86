#pragma once

// Scenario configuration: one JSON document drives a run.  Parsing validates
// the whole tree first (all violations are reported, unknown keys rejected)
// and only then builds the typed objects.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qld/boundary.hpp"
#include "qld/constitutive.hpp"
#include "qld/dynamics.hpp"
#include "qld/grid.hpp"
#include "qld/surface_energy.hpp"

namespace qld {

/// All schema violations of one document, path-tagged.
struct SchemaError : Error {
  std::vector<std::string> violations;
  explicit SchemaError(std::vector<std::string> v);
};

enum class InitialPreset {
  Natural,
  SinePhonon,      // u_comp += amp sin(2 pi k X / L)
  SinePhason,      // w_comp += amp sin(2 pi k X / L)
  SineBoth,
  RandomPhason,    // seeded smooth random phason field
  Bump2D,          // compactly supported smooth bump on both channels
};

struct InitialSpec {
  InitialPreset preset = InitialPreset::Natural;
  double amplitude = 1e-3;
  int wavenumber = 1;
  int component = 0;
  double velocityAmplitude = 0.0;
};

struct InterfaceSpec {
  Vec3 center{0.5, 0.5, 0.0};
  double radius = 0.25;
  int markers = 200;
  double ftilde = 1.0;
  SurfaceEnergyModel surface;
  double dt = 1e-4;
  double tEnd = 0.1;
  int outputEvery = 10;
  bool coupleBulk = false;   // sample bulk jumps each step (one-way)
  double epsFactor = 1.5;    // jump sampling offset in units of h
};

struct VerifySpec {
  std::vector<std::string> suites;  // noether invariance universal_affine
                                    // metric eshelby power
  int samples = 100;
  int gridCells = 24;
};

struct Scenario {
  Grid grid;
  MaterialModel material;
  BoundaryConditions bc;
  InitialSpec initial;
  SimConfig sim;
  std::optional<InterfaceSpec> interface;
  VerifySpec verify;
  std::uint64_t seed = 0;
  std::string outputDir = "out";
};

/// Parses and validates; throws SchemaError carrying every violation found.
Scenario parse_scenario(const std::string& text);

/// Canonical JSON (stable key order and number formatting); feeding it back
/// through parse_scenario reproduces an equal scenario.
std::string serialize_scenario(const Scenario& sc);

/// Initial state from the scenario's preset and seed.
FieldState build_initial_state(const Scenario& sc);

}  // namespace qld
