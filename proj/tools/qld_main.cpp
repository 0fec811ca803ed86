// qld: batch driver for quasiperiodic-crystal continuum runs.
//
//   qld simulate  scenario.json [--out DIR] [--seed N] [--max-steps N]
//   qld minimize  scenario.json ...
//   qld verify    scenario.json ...
//   qld interface scenario.json ...
//
// Exit codes: 0 success, 1 usage/scenario error, 2 failed verification
// checks, 3 minimizer not converged, 4 interface step rejected.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qld/runner.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qld::Error("cannot read scenario file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasiperiodic-crystal continuum mechanics driver"};
  app.require_subcommand(1);

  std::string scenarioPath, outDir;
  long long maxSteps = -2;
  long long seed = -1;

  auto addCommon = [&](CLI::App* cmd) {
    cmd->add_option("scenario", scenarioPath, "scenario JSON file")->required();
    cmd->add_option("--out", outDir, "override the output directory");
    cmd->add_option("--seed", seed, "override the scenario seed");
    cmd->add_option("--max-steps", maxSteps, "cap the number of steps");
  };
  for (const char* name : {"simulate", "minimize", "verify", "interface"})
    addCommon(app.add_subcommand(name));

  CLI11_PARSE(app, argc, argv);
  const std::string stage = app.get_subcommands().front()->get_name();

  try {
    qld::Scenario sc = qld::parse_scenario(slurp(scenarioPath));
    if (!outDir.empty()) sc.outputDir = outDir;
    if (seed >= 0) sc.seed = std::uint64_t(seed);
    if (maxSteps >= -1) sc.sim.maxSteps = maxSteps;
    const qld::RunReport rep = qld::run(sc, stage);
    std::cout << rep.summary << "\n";
    return rep.exitCode;
  } catch (const qld::SchemaError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
