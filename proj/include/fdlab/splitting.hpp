#pragma once

#include <string>
#include <vector>

#include "fdlab/diagnostics.hpp"
#include "fdlab/diffusion.hpp"
#include "fdlab/drift.hpp"
#include "fdlab/io.hpp"
#include "fdlab/transport.hpp"
#include "fdlab/trajectory.hpp"

namespace fdlab {

struct SplittingSchedule {
  double T = 1.0;
  int n = 8;
  DiffusionParams diffusion;
  int rk_steps = 8;
  std::vector<double> output_times;  // multiples of diffusion.dt; endpoints t_i always added
  bool output_every_step = false;
  std::vector<double> epsilon_sequence;
  double diagnostics_q = 2.0;
  bool renormalize = true;
  ExitPolicy on_exit = ExitPolicy::fail;

  // Inner steps per subinterval; throws if dt does not divide T/n.
  int steps_per_subinterval() const;
  void validate() const;
};

class SplittingFailure : public std::runtime_error {
 public:
  SplittingFailure(const std::string& what, int subinterval)
      : std::runtime_error(what), subinterval(subinterval) {}
  int subinterval;
};

// On each (t_i, t_{i+1}]: implicit diffusion from rho(t_i), then the result
// is pushed forward along V from t_i. Interior outputs are the push-forward of
// the interior diffusion state over [t_i, t].
TrajectoryRecord run_splitting(const DensityField& rho0, const DriftSpec& V,
                               const SplittingSchedule& schedule);

struct WeakResidual {
  std::vector<double> per_test;
  double max_abs = 0.0;
};
WeakResidual weak_residual(const TrajectoryRecord& traj, const DriftSpec& V, double m, double eps,
                           const std::vector<TestFunction>& tests);

struct StudyRow {
  int n = 0;
  double epsilon = 0.0;
  double l1_error = 0.0;  // at T against the reference
  double w2_error = 0.0;  // 1D only (NaN in 2D)
};
struct ConvergenceStudy {
  std::vector<StudyRow> n_rows;
  double n_order = 0.0;         // fitted -slope of log L1 error vs log n
  std::vector<StudyRow> epsilon_rows;  // error(eps_k, eps_{k+1}) at the finest n
  int reference_n = 0;
  double reference_dt = 0.0;
};
// Reference: same scheme with 4x the finest n and dt/4.
ConvergenceStudy convergence_study(const DensityField& rho0, const DriftSpec& V,
                                   const SplittingSchedule& base, const std::vector<int>& n_list);

struct SubintervalEnergy {
  double t0 = 0.0, t1 = 0.0;
  double value0 = 0.0, value1 = 0.0;  // functional at the ends
  double dissipation = 0.0;           // K_q int_{t0}^{t1} int |grad (eps+rho)^((q+m-1)/2)|^2
  double source = 0.0;                // bound on the drift contribution
  double increment = 0.0;             // value1 - value0
  double balance = 0.0;               // value1 + dissipation - value0 - source
};
struct SplittingEnergyReport {
  double q = 1.0;
  std::vector<SubintervalEnergy> intervals;
  double max_increment = 0.0;
  double max_balance = 0.0;
  double c_fit = 0.0;  // n * max(0, max_increment)
};
// q = 1 uses int (eps+rho) log(eps+rho) with K_1 = 4/m; q > 1 uses
// int (eps+rho)^q with K_q = 4mq(q-1)/(q+m-1)^2.
SplittingEnergyReport splitting_energy_report(const TrajectoryRecord& traj, const DriftSpec& V,
                                              double m, double q, double eps);

// Trajectory directory: manifest.json, snapshot_XXXX.{json,bin}, diagnostics.csv.
// The manifest carries the drift, so a directory is self-describing.
void write_trajectory(const fs::path& dir, const TrajectoryRecord& traj, const DriftSpec& V,
                      const json& extra = json::object());
TrajectoryRecord read_trajectory(const fs::path& dir, DriftSpec* drift = nullptr,
                                 json* manifest = nullptr);
std::string diagnostics_csv(const TrajectoryRecord& traj);

}  // namespace fdlab
