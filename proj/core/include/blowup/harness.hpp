#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blowup/registry.hpp"

namespace blowup::harness {

enum class ExperimentKind { KoCheck, Solve1D, EllMap, DeadCore, Radial, Cylinder, Asymptotics };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);  // throws ConfigError
const std::vector<ExperimentKind>& all_kinds();

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::KoCheck;
  std::string name;                  // defaults to the experiment kind
  registry::ForceSpec force;
  registry::OperatorSpec op;
  nlohmann::json params;             // validated, defaults filled in
  std::string output;                // optional output directory from the file
  nlohmann::json echo;               // normalized config (kind, force, operator, params)
};

// Parses JSON text (comments allowed). Syntax errors carry line and column; semantic
// errors carry the key path. Unknown keys are rejected. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// JSON-schema document for the config format.
nlohmann::json config_schema();

struct CheckResult {
  std::string name;
  bool passed = false;
  nlohmann::json value;      // measured quantity
  nlohmann::json tolerance;  // threshold or band
  std::string detail;
  std::string error;         // set when the check raised
};

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::KoCheck;
  nlohmann::json config;
  std::vector<CheckResult> checks;
  nlohmann::json measurements = nlohmann::json::object();
  std::vector<std::string> files;  // relative to the output directory, in write order
  nlohmann::json timings = nlohmann::json::object();

  bool passed() const;
  nlohmann::json to_json() const;
  std::string summary() const;  // plain text, free of timings
};

// Runs the experiment, writes artifacts plus report.json and summary.txt under out_dir.
// Failed checks never abort later checks. Throws ConfigError for invalid parameters.
ExperimentReport run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream* log = nullptr);

struct DiffEntry {
  std::string key;
  nlohmann::json a;
  nlohmann::json b;
  double abs_diff = 0.0;  // numeric entries only, else infinity
};

struct RunDiff {
  std::string kind;
  std::vector<DiffEntry> measurements;
  std::vector<DiffEntry> checks;  // pass/fail changes
  double max_abs_diff = 0.0;

  bool empty() const { return measurements.empty() && checks.empty(); }
  nlohmann::json to_json() const;
};

// Structured diff of two reports. Throws ConfigError when the experiment kinds differ.
RunDiff compare_runs(const nlohmann::json& report_a, const nlohmann::json& report_b);

}  // namespace blowup::harness
