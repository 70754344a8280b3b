#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdlab/diffusion.hpp"
#include "fdlab/fields.hpp"
#include "fdlab/io.hpp"

namespace fdlab {

// Temperature-like scalar theta (cell centres) and a MAC velocity. The grid
// boundary selects no-slip walls (neumann) or a doubly periodic box.
struct BoussinesqState {
  DensityField theta;
  std::vector<double> u;         // (nx+1)*ny x-faces; periodic: u[nx] == u[0]
  std::vector<double> v;         // nx*(ny+1) y-faces; periodic: v[ny] == v[0]
  std::vector<double> pressure;  // cell centred, defined up to a constant
  double time = 0.0;

  const Grid& grid() const { return theta.grid(); }
  bool periodic() const { return grid().boundary() == Boundary::periodic; }
  static BoussinesqState at_rest(const DensityField& theta);
  double max_speed() const;
  // Max |discrete divergence| over cells.
  double max_divergence() const;
  double velocity_l2() const;  // sqrt(sum over faces u^2 h^2)
};

class CflViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BoussinesqStepStats {
  double cfl = 0.0;
  double divergence_after = 0.0;
  double theta_mass_change = 0.0;  // relative
  bool theta_transported = false;
  bool drift_divergence_free = false;  // cell-centred field passed the 1e-8 gate
};

// Factorisations for one grid and dt, reused across steps.
class BoussinesqSolver {
 public:
  BoussinesqSolver(const Grid& grid, double dt);
  ~BoussinesqSolver();
  BoussinesqSolver(BoussinesqSolver&&) noexcept;

  // One coupled step: theta by diffusion then transport along the current
  // velocity; velocity by explicit advection, implicit viscosity, then
  // buoyancy -theta e_y added inside the pressure projection.
  BoussinesqState step(const BoussinesqState& s, double m, double eps,
                       BoussinesqStepStats* stats = nullptr) const;
  double dt() const { return dt_; }

  // int |grad u|^2 with the same discrete operator the viscous solve uses.
  double velocity_dissipation(const BoussinesqState& s) const;

 private:
  struct Impl;
  Grid grid_;
  double dt_;
  std::unique_ptr<Impl> impl_;
};

BoussinesqState step_boussinesq(const BoussinesqState& s, double m, double eps, double dt);

struct BoussinesqSample {
  double time = 0.0;
  double theta_mass = 0.0;
  double kinetic = 0.0;             // int |u|^2
  double theta_dissipation = 0.0;   // int |grad (eps+theta)^(m/2)|^2
  double velocity_dissipation = 0.0;  // int |grad u|^2
  double lhs = 0.0;                 // sup-part + accumulated dissipation up to time
};

struct BoussinesqEnergyReport {
  std::vector<BoussinesqSample> samples;
  double lhs_max = 0.0;
  double scale = 0.0;  // initial-data scale S0
  double ratio = 0.0;  // lhs_max / scale
  bool bounded = false;  // lhs_max <= 2 scale
  double max_mass_drift = 0.0;  // max per-step relative change of int theta
  // Kinetic balance |u(t)|^2 + 2 int int |grad u|^2 - |u0|^2 relative to |u0|^2
  // (meaningful when theta = 0).
  double kinetic_balance = 0.0;
};

struct BoussinesqRun {
  std::vector<BoussinesqState> states;  // at every step
  BoussinesqEnergyReport energy;
  double max_cfl = 0.0;
  double max_divergence = 0.0;
};

// Marches to T with a fixed dt, keeps every state and evaluates the bound
//   sup_t (int theta + int |u|^2) + int int (|grad theta^(m/2)|^2 + |grad u|^2)
//   <= 2 S0,  S0 = M + B_u + (m/4)(H0 - M log(M/|Omega|)),
//   B_u = |u0|^2 + 2(int theta0 y - M y_min) + 2 T L_x (sup theta0)^m.
BoussinesqRun run_boussinesq(const BoussinesqState& init, double m, double eps, double T,
                             double dt);

BoussinesqEnergyReport boussinesq_energy_check(const std::vector<BoussinesqState>& states,
                                               const BoussinesqSolver& solver, double m,
                                               double eps);

// u = sin x cos y, v = -cos x sin y scaled to the box; kinetic energy of the
// viscous solution decays like exp(-2 nu |k|^2 t) with nu = 1.
BoussinesqState taylor_green(const Grid& periodic_grid, double amplitude = 1.0);
double taylor_green_decay_rate(const Grid& grid);

// Directory with manifest.json, theta snapshots and velocity arrays per
// stride-th state, plus energy.csv.
void write_boussinesq(const fs::path& dir, const BoussinesqRun& run, double m, double eps,
                      int stride, const json& extra = json::object());

}  // namespace fdlab
