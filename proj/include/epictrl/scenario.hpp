#pragma once

// Scenario files: a flat JSON object with a schema version.
//
//   { "schema_version": 1, "name": "italy-2020",
//     "beta": 0.2142, "gamma": 0.0714, "u_max": 0.135, "i_M": 0.0031,
//     "lambda1": 1, "lambda2": 0, "s0": 0.94, "i0": 0.001,
//     "horizon": 3000, "step": 0.01 }

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epictrl/cost.hpp"
#include "epictrl/sir_core.hpp"

namespace epictrl {

inline constexpr int kScenarioSchemaVersion = 1;

struct Scenario {
  std::string name;
  EpidemicParams params;
  CostWeights weights;
  EpidemicState state0;
  double horizon = 0.0;
  double step = kDefaultStep;

  /// Throws Error(ScenarioInvalid) naming the offending field.
  void validate() const;
};

std::vector<std::string> preset_names();
std::optional<Scenario> find_preset(std::string_view name);

/// Throws Error(ScenarioInvalid) with "source:line:column" or field diagnostics.
Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
std::string dump_scenario(const Scenario& scenario);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// A preset name or a path to a scenario file. Unknown names that are not
/// files raise Error(ScenarioInvalid) listing the presets.
Scenario resolve_scenario(const std::string& preset_or_path);

}  // namespace epictrl
