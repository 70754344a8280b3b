#pragma once

#include <string>
#include <vector>

#include "fdlab/drift.hpp"
#include "fdlab/fields.hpp"

namespace fdlab {

// One row of the per-snapshot diagnostics table.
struct DiagnosticsRow {
  double time = 0.0;
  double mass = 0.0;
  double entropy = 0.0;       // int rho log rho
  double lq_norm = 0.0;       // ||rho||_q, q = TrajectoryRecord::diagnostics_q
  double grad_energy = 0.0;   // int |grad (eps+rho)^((q+m-1)/2)|^2
  double speed_fisher = 0.0;  // int |grad (eps+rho)^m|^2 / (eps+rho)
  double speed_drift = 0.0;   // int |V|^2 rho
};

struct TrajectoryRecord {
  std::vector<DensityField> snapshots;  // time-tagged, strictly increasing
  std::vector<DiagnosticsRow> diagnostics;
  std::vector<double> subinterval_ends;  // 0 = t_0 < t_1 < ... < t_n = T
  double m = 1.0;
  double epsilon = 0.0;
  double diagnostics_q = 2.0;
  std::string provenance;  // schedule, drift and initial-data hashes

  std::vector<double> times() const;
  std::size_t size() const { return snapshots.size(); }
  const Grid& grid() const { return snapshots.front().grid(); }
  double horizon() const { return snapshots.back().time(); }
  // Index of the snapshot at time t (within 1e-9 relative), or npos.
  std::size_t find(double t) const;
  static constexpr std::size_t npos = std::size_t(-1);
};

DiagnosticsRow diagnostics_row(const DensityField& f, const DriftSpec& V, double m, double eps,
                               double q);

}  // namespace fdlab
