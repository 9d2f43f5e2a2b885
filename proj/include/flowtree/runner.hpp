#pragma once

// Scenario-driven batch runner: builds the trees of a depth sweep, runs the
// selected verification suites in a fixed order and assembles a report.

#include "flowtree/io.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace flowtree::runner {

using io::Json;

struct Check {
  std::string name;
  bool passed = true;
  bool informational = false;  // reported, never affects the verdict
  Json witness;                // concrete counterexample object on failure
  Json detail;
};

struct SuiteResult {
  std::string name;
  std::string context;
  std::vector<Check> checks;
  Json data = Json::object();
  double seconds = 0.0;
  bool passed() const;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  bool record_timing = false;
  std::vector<SuiteResult> suites;
  Json series = Json::object();
  std::string csv;  // per-trapezoid table, empty unless requested
  bool passed() const;
  Json to_json() const;
};

/// Execution order; later suites may reuse what earlier ones established.
inline constexpr std::array<std::string_view, 12> kSuiteOrder = {
    "constants", "th01",           "th1",    "lstv", "cover", "maximal",
    "split-cz",  "reverse-holder", "ainfty", "bmo",  "maps",  "counterexample"};

/// Runs a parsed scenario. Output paths in the scenario are ignored here.
RunReport run_scenario(const Json& scenario);

/// Reads the file, runs it and writes the report and CSV paths it names
/// (relative to the scenario's directory).
RunReport run_scenario_file(const std::string& path);

/// The full property battery at one depth with a fixed seed. Rejects
/// depth < 1.
RunReport verify_all(int depth, std::uint64_t seed = 1);

/// One line per suite: "PASS name [context]" or "FAIL ...".
std::string summary(const RunReport& report);

}  // namespace flowtree::runner
