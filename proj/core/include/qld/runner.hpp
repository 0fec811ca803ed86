#pragma once

// Batch orchestration: each entry point executes one scenario stage and
// writes its outputs under the scenario's output directory.
//
//   simulate  -> diagnostics.csv (+ fields_NNNNNN.vtk at the output cadence)
//   minimize  -> diagnostics.csv, fields_final.vtk
//   interface -> interface.csv
//   verify    -> report.csv (one row per check; nonzero exit on any failure)
//
// The diagnostics max_residual column holds the run's monitored defect: the
// relative energy drift for conservative runs, the positive part of the
// energy increment for dissipative ones, and the equilibrium residual for
// minimization.

#include <string>

#include "qld/scenario.hpp"

namespace qld {

struct RunReport {
  int exitCode = 0;
  std::string summary;
};

RunReport run_simulate(const Scenario& sc);
RunReport run_minimize(const Scenario& sc);
RunReport run_verify(const Scenario& sc);
RunReport run_interface(const Scenario& sc);

/// Dispatch by stage name (the CLI subcommand).
RunReport run(const Scenario& sc, const std::string& stage);

}  // namespace qld
