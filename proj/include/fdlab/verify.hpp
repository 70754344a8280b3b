#pragma once

#include <string>
#include <vector>

#include "fdlab/io.hpp"
#include "fdlab/scenario.hpp"
#include "fdlab/trajectory.hpp"

namespace fdlab {

enum class CheckStatus { pass = 0, violation = 1, refused = 2 };

struct BatteryResult {
  std::string battery;
  CheckStatus status = CheckStatus::pass;
  json report;  // {"battery", "status", "checks": [{"name", "pass", "slack", ...}]}
};

// Batteries: lemma-A1, energy-divfree, speed, holder, weak-residual,
// functional, all. A refused battery (precondition not met) reports why.
// Unknown names throw std::invalid_argument.
BatteryResult run_battery(const std::string& name, const TrajectoryRecord& traj, const DriftSpec& V,
                          const Scenario& settings);
// Loads the directory (manifest carries the drift and the scenario table).
BatteryResult run_battery(const std::string& name, const fs::path& dir);

const std::vector<std::string>& battery_names();

}  // namespace fdlab
