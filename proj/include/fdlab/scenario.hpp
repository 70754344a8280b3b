#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdlab/drift.hpp"
#include "fdlab/fields.hpp"
#include "fdlab/io.hpp"
#include "fdlab/splitting.hpp"

namespace fdlab {

// Scenario files are INI text: [section] headers and key = value lines; lists
// are comma separated, points are "x,y". See README for every key.
struct VerifySettings {
  std::vector<std::string> batteries;
  DriftClass drift_class = DriftClass::D;
  MixedNormSpec exponents{kInf, kInf};
  double energy_constant = 1.0;  // C in the C/n slack of the energy battery
  double probe_dt = 0.0;         // first dt of the homogeneous-step battery (0: schedule dt)
  std::vector<int> strides;  // empty: default_strides(snapshot count)
  int delta_K = 16;
  double weak_tolerance = 0.05;
  std::vector<int> refine_n;  // refinement ladder for the residual studies
  int refine_substeps = 0;    // inner steps per subinterval when refining (0: keep dt)
};

struct ConvectionSettings {
  bool present = false;
  std::string mode = "walls";  // walls | taylor-green
  double T = 0.5;
  double dt = 1e-3;
  double amplitude = 1.0;
  int stride = 10;
};

struct Scenario {
  std::string name;
  std::string output;
  std::uint64_t seed = 1;
  Grid grid;
  double m = 1.0;
  double epsilon = 0.0;
  std::vector<double> q_list{2.0};
  json raw;             // section -> key -> string, as read
  json drift_config;    // section as read, for provenance
  json initial_config;
  DriftSpec drift;
  DensityField rho0;
  SplittingSchedule schedule;
  VerifySettings verify;
  ConvectionSettings convection;

  json to_json() const;
};

// Every violated field is listed, not only the first.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> problems);
  std::vector<std::string> problems;
};

Scenario parse_scenario(const std::string& text, const std::string& origin = "<text>");
Scenario load_scenario(const fs::path& path);
// Rebuilds the settings stored in a run manifest.
Scenario scenario_from_json(const json& j);

// Presets, also used by the bindings.
DriftSpec drift_from_config(const json& section, int dim);
DensityField initial_from_config(const json& section, const Grid& grid);

std::vector<double> parse_list(const std::string& s);

}  // namespace fdlab
