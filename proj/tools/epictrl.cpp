#include <CLI11.hpp>

#include <iostream>

#include "epictrl/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Optimal lockdown control of the SIR epidemic under an ICU ceiling"};
  app.set_version_flag("--version", "epictrl 1.0");

  std::string command;
  std::string scenario;
  epictrl::RunRequest request;
  double lambda2 = 0.0;
  double horizon = 0.0;
  double step = 0.0;
  std::string out_dir = ".";

  app.add_option("command", command, "simulate | viability | greedy | optimize | verify | gamma")
      ->required()
      ->check(CLI::IsMember({"simulate", "viability", "greedy", "optimize", "verify", "gamma"}));
  app.add_option("scenario", scenario, "preset name (italy-2020, delta-2021) or scenario file")
      ->required();
  auto* l2 = app.add_option("--lambda2", lambda2, "infection weight");
  auto* hz = app.add_option("--horizon", horizon, "horizon in days");
  auto* st = app.add_option("--step", step, "integration step in days");
  app.add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : epictrl::kExitFailure;
  }

  request.command = *epictrl::parse_command(command);
  request.scenario_source = scenario;
  request.output_dir = out_dir;
  if (*l2) request.overrides.lambda2 = lambda2;
  if (*hz) request.overrides.horizon = horizon;
  if (*st) request.overrides.step = step;
  return epictrl::run_scenario(request, std::cout, std::cerr);
}
