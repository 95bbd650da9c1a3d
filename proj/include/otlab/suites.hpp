#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "otlab/report.hpp"

namespace otlab {

// Knobs shared by every suite.  Worker count is handled by the CLI; nothing
// here may depend on scheduling.
struct SuiteConfig {
  std::uint64_t seed = 1;
  int samples = 20000;      // Monte Carlo batch size
  int oracle_points = 384;  // discrete assignment oracle size
  int probes = 20;          // characteristic-function frequencies
  int trials = 8;           // random rotations / permutations
  int steps = 64;           // path discretization
  int paths = 4096;         // simulated paths
  int grid_points = 4096;   // 1-D solver grid
  double grid_range = 8.0;
  double jacobian_bias_tol = 0.03;
};

// Parses flat key=value entries; unknown keys or malformed numbers throw
// ConfigError naming the field.
SuiteConfig config_from_entries(
    const std::vector<std::pair<std::string, std::string>>& entries);

struct InstanceInfo {
  std::string name;
  std::string summary;
  std::vector<std::string> suites;
};

// detcf, polar, gaussmap, ma-verify, dimlift, ito-sim.
const std::vector<std::string>& suite_names();
std::string suite_description(const std::string& suite);
std::vector<InstanceInfo> instance_catalog();

struct SuiteRun {
  std::string suite;
  std::string instance;
  Report report;
};

// Expands suite "all" and an empty instance name to everything registered,
// and runs each (suite, instance) pair.  Throws ConfigError for unknown
// names or a pair the instance does not support.
std::vector<SuiteRun> run_suites(const std::string& suite,
                                 const std::string& instance,
                                 const SuiteConfig& cfg);

// The expansion of run_suites, without running anything.
std::vector<std::pair<std::string, std::string>> plan_runs(
    const std::string& suite, const std::string& instance);

// Runs a single (suite, instance) pair.
SuiteRun run_one(const std::string& suite, const std::string& instance,
                 const SuiteConfig& cfg);

}  // namespace otlab
