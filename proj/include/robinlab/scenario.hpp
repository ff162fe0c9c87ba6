#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robinlab/config.hpp"

namespace robinlab {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // the quantity the check compared
  double tolerance = 0.0;  // the budget it was compared against
  std::string detail;
};

struct ScenarioReport {
  std::string name;
  bool config_ok = true;
  std::string error;  // set when config_ok is false
  std::vector<CheckResult> checks;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;  // informational; never written to CSV

  bool all_passed() const;
};

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config seed
  int threads = 1;                    // suite-level worker count
};

// Names of the registered verification checks, sorted.
std::vector<std::string> list_checks();

// Parses, solves when the problem has a positive horizon, runs every
// [verify.*] check, and writes the configured CSV outputs plus
// <name>_checks.csv under out_dir. Config and solver errors are captured in
// the report, not thrown.
ScenarioReport run_scenario(const Config& cfg, const RunOptions& opt = {});
ScenarioReport run_scenario_file(const std::string& path, const RunOptions& opt = {});

// Runs every *.toml under dir (sorted by name) through a worker pool and
// writes suite_summary.csv under out_dir. Failures stay per-scenario.
std::vector<ScenarioReport> run_suite(const std::string& dir, const RunOptions& opt = {});

void save_suite_summary(const std::vector<ScenarioReport>& reports,
                        const std::string& path);

}  // namespace robinlab
