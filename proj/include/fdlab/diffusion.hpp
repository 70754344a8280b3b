#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "fdlab/fields.hpp"

namespace fdlab {

struct DiffusionParams {
  double m = 1.0;
  double epsilon = 0.0;
  double dt = 1e-3;
  double newton_tol = 1e-12;
  int newton_max_iters = 50;
  void validate() const;
};

struct DiffusionStep {
  DensityField field;
  int newton_iterations = 0;
  int picard_iterations = 0;
  double residual = 0.0;
  double clipped_mass = 0.0;
};

class DiffusionFailure : public std::runtime_error {
 public:
  DiffusionFailure(const std::string& what, double residual)
      : std::runtime_error(what), last_residual(residual) {}
  double last_residual;
};

// Backward Euler step of d_t u = div grad (eps + u)^m with zero boundary flux,
// in flux form on the cell-centred grid. The stepper caches the Laplacian
// and the sparsity analysis for repeated steps on one grid.
class DiffusionStepper {
 public:
  explicit DiffusionStepper(const Grid& grid);
  ~DiffusionStepper();
  DiffusionStepper(DiffusionStepper&&) noexcept;
  DiffusionStepper& operator=(DiffusionStepper&&) noexcept;

  DiffusionStep step(const DensityField& before, const DiffusionParams& p) const;
  const Grid& grid() const { return grid_; }

 private:
  struct Impl;
  Grid grid_;
  std::unique_ptr<Impl> impl_;
};

DiffusionStep step_diffusion(const DensityField& before, const DiffusionParams& p);

// Discrete Neumann Laplacian applied to v (flux form, zero boundary flux).
std::vector<double> apply_laplacian(const Grid& grid, std::span<const double> v);

struct IdentityResidual {
  double lhs = 0.0;   // energy after + dissipation term
  double rhs = 0.0;   // energy before
  double residual = 0.0;
  double residual_over_dt = 0.0;
};

// |int (eps+after)^q + c dt int |grad (eps+after)^((q+m-1)/2)|^2 - int (eps+before)^q|,
// c = 4 m q (q-1) / (m+q-1)^2.
IdentityResidual diffusion_energy_identity(const DensityField& before, const DensityField& after,
                                           const DiffusionParams& p, double q);

struct EntropyDissipation {
  double lhs = 0.0;  // entropy after + dt (4/m) int |grad (eps+after)^(m/2)|^2
  double rhs = 0.0;  // entropy before
  double tol = 0.0;
  double slack = 0.0;  // rhs + tol - lhs
  bool holds = true;
};

EntropyDissipation entropy_dissipation_report(const DensityField& before,
                                              const DensityField& after,
                                              const DiffusionParams& p);

}  // namespace fdlab
