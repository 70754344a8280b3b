#pragma once

#include "fdlab/diagnostics.hpp"
#include "fdlab/drift.hpp"
#include "fdlab/io.hpp"
#include "fdlab/metrics.hpp"

namespace fdlab {

// Round-trips every closed-form kind. Staggered fields serialise their face
// arrays and grid.
json drift_to_json(const DriftSpec& V);
DriftSpec drift_from_json(const json& j);

json to_json(const DriftClassReport& r);
json to_json(const EnergyBudget& b);
json to_json(const SobolevReport& r);
json to_json(const InterpolationReport& r);
json to_json(const VrhoReport& r);
json to_json(const HolderFit& f);

// JSON has no infinity; kInf is written as the string "inf".
json number(double v);
double number_from(const json& j);

}  // namespace fdlab
