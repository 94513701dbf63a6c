#pragma once

// Command runner behind the epictrl tool. Each command resolves a scenario,
// applies flag overrides and writes its outputs into one directory:
//
//   simulate   trajectory.csv, report.json   (u = 0)
//   viability  zones.csv, report.json
//   greedy     trajectory.csv, report.json
//   optimize   trajectory.csv, report.json
//   verify     trajectory.csv, adjoint.csv, report.json
//   gamma      report.json

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epictrl/cost.hpp"
#include "epictrl/scenario.hpp"
#include "epictrl/sir_core.hpp"

namespace epictrl {

enum class Command { Simulate, Viability, Greedy, Optimize, Verify, Gamma };

std::string_view to_string(Command command);
std::optional<Command> parse_command(std::string_view name);

struct ScenarioOverrides {
  std::optional<double> lambda2;
  std::optional<double> horizon;
  std::optional<double> step;
};

/// Applies the overrides and revalidates.
Scenario apply_overrides(Scenario scenario, const ScenarioOverrides& overrides);

struct RunRequest {
  Command command = Command::Simulate;
  std::string scenario_source;  // preset name or scenario file
  std::filesystem::path output_dir = ".";
  ScenarioOverrides overrides;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInfeasible = 2;

/// Runs one command. Progress goes to out, diagnostics to err.
/// Returns kExitOk, kExitInfeasible on an infeasible start, kExitFailure otherwise.
int run_scenario(const RunRequest& request, std::ostream& out, std::ostream& err);

/// Rows are thinned to one per kCsvSpacing days, keeping both sides of
/// every control discontinuity. Values use 12 significant digits.
inline constexpr double kCsvSpacing = 0.1;
void write_trajectory_csv(std::ostream& os, const CostWeights& w, const Trajectory& traj);

/// Curves sampled at s = k * 1e-3, k = 1..1000.
void write_zones_csv(std::ostream& os, const EpidemicParams& p);

/// Horizons used by the gamma command: horizon * {1/2, 2/3, 5/6, 1} on a 10-day grid.
std::vector<double> gamma_horizons(double horizon);

}  // namespace epictrl
