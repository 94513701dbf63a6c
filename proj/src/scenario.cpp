#include "epictrl/scenario.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace epictrl {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 12> kFields = {
    "schema_version", "name", "beta", "gamma", "u_max", "i_M",
    "lambda1",        "lambda2", "s0", "i0",   "horizon", "step"};

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

// Line of the first occurrence of "key" in the text, for field diagnostics.
std::string field_location(const std::string& text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const auto pos = text.find(quoted);
  return pos == std::string::npos ? std::string("?") : line_col(text, pos);
}

[[noreturn]] void field_error(const std::string& source, const std::string& text,
                              std::string_view key, const std::string& what) {
  throw Error(ErrorCode::ScenarioInvalid, source + ":" + field_location(text, key) +
                                              ": field '" + std::string(key) + "' " + what);
}

double number(const json& j, const std::string& source, const std::string& text,
              std::string_view key) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) field_error(source, text, key, "is missing");
  if (!it->is_number()) field_error(source, text, key, "must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) field_error(source, text, key, "must be finite");
  return v;
}

Scenario italy_2020() {
  Scenario s;
  s.name = "italy-2020";
  s.params = {0.2142, 0.0714, 0.135, 0.0031};
  s.weights = {1.0, 0.0};
  s.state0 = {0.94, 0.001};
  s.horizon = 3000.0;
  s.step = kDefaultStep;
  return s;
}

Scenario delta_2021() {
  Scenario s;
  s.name = "delta-2021";
  s.params = {0.5, 0.0714, 0.315, 0.021};
  s.weights = {1.0, 0.0};
  s.state0 = {0.5, 0.001};
  s.horizon = 600.0;
  s.step = kDefaultStep;
  return s;
}

}  // namespace

void Scenario::validate() const {
  auto fail = [](std::string_view field, const std::string& what) {
    throw Error(ErrorCode::ScenarioInvalid, "field '" + std::string(field) + "' " + what);
  };
  if (!(params.beta > 0.0)) fail("beta", "must be positive");
  if (!(params.gamma > 0.0)) fail("gamma", "must be positive");
  if (!(params.u_max > 0.0 && params.u_max < params.beta)) fail("u_max", "must lie in (0, beta)");
  if (!(params.i_M > 0.0 && params.i_M <= 1.0)) fail("i_M", "must lie in (0, 1]");
  if (!(weights.lambda1 > 0.0)) fail("lambda1", "must be positive");
  if (!(weights.lambda2 >= 0.0)) fail("lambda2", "must be non-negative");
  if (!(state0.s > 0.0)) fail("s0", "must be positive");
  if (!(state0.i > 0.0)) fail("i0", "must be positive");
  if (!(state0.s + state0.i <= 1.0)) fail("i0", "s0 + i0 must not exceed 1");
  if (!(horizon > 0.0)) fail("horizon", "must be positive");
  if (!(step > 0.0)) fail("step", "must be positive");
}

std::vector<std::string> preset_names() { return {"italy-2020", "delta-2021"}; }

std::optional<Scenario> find_preset(std::string_view name) {
  if (name == "italy-2020") return italy_2020();
  if (name == "delta-2021") return delta_2021();
  return std::nullopt;
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ScenarioInvalid,
                source + ":" + line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ScenarioInvalid, source + ": expected a JSON object");

  for (const auto& [key, value] : j.items()) {
    if (std::find(kFields.begin(), kFields.end(), key) == kFields.end())
      field_error(source, text, key, "is not part of the schema");
  }

  const auto version = j.find("schema_version");
  if (version == j.end()) field_error(source, text, "schema_version", "is missing");
  if (!version->is_number_integer() || version->get<int>() != kScenarioSchemaVersion)
    field_error(source, text, "schema_version",
                "must be " + std::to_string(kScenarioSchemaVersion));

  Scenario s;
  const auto name = j.find("name");
  if (name == j.end()) field_error(source, text, "name", "is missing");
  if (!name->is_string()) field_error(source, text, "name", "must be a string");
  s.name = name->get<std::string>();
  s.params.beta = number(j, source, text, "beta");
  s.params.gamma = number(j, source, text, "gamma");
  s.params.u_max = number(j, source, text, "u_max");
  s.params.i_M = number(j, source, text, "i_M");
  s.weights.lambda1 = number(j, source, text, "lambda1");
  s.weights.lambda2 = number(j, source, text, "lambda2");
  s.state0.s = number(j, source, text, "s0");
  s.state0.i = number(j, source, text, "i0");
  s.horizon = number(j, source, text, "horizon");
  s.step = number(j, source, text, "step");

  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ScenarioInvalid, source + ": " + e.what());
  }
  return s;
}

std::string dump_scenario(const Scenario& s) {
  json j = json::object();
  j["schema_version"] = kScenarioSchemaVersion;
  j["name"] = s.name;
  j["beta"] = s.params.beta;
  j["gamma"] = s.params.gamma;
  j["u_max"] = s.params.u_max;
  j["i_M"] = s.params.i_M;
  j["lambda1"] = s.weights.lambda1;
  j["lambda2"] = s.weights.lambda2;
  j["s0"] = s.state0.s;
  j["i0"] = s.state0.i;
  j["horizon"] = s.horizon;
  j["step"] = s.step;
  return j.dump(2) + "\n";
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write scenario file " + path.string());
  out << dump_scenario(scenario);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Scenario resolve_scenario(const std::string& preset_or_path) {
  if (auto preset = find_preset(preset_or_path)) return *preset;
  std::error_code ec;
  if (std::filesystem::is_regular_file(preset_or_path, ec)) return load_scenario(preset_or_path);
  std::string list;
  for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
  throw Error(ErrorCode::ScenarioInvalid,
              "unknown preset or missing file '" + preset_or_path + "'; available presets: " + list);
}

}  // namespace epictrl
