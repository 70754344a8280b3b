#pragma once

#include <stdexcept>
#include <string>

#include "fdlab/drift.hpp"
#include "fdlab/fields.hpp"

namespace fdlab {

// What a backward trace does when it leaves the closed domain by more than
// the tolerance: fail (the drift violates V.n = 0), or treat the foot as
// carrying zero density (inflow of nothing through the wall).
enum class ExitPolicy { fail, zero_inflow };

struct FlowTrace {
  double s = 0.0, t = 0.0;
  Vec2 start{0.0, 0.0};
  Vec2 end{0.0, 0.0};
  double divergence_integral = 0.0;
  int steps = 0;
  double clamp_distance = 0.0;
  bool exited = false;
  double jacobian() const;
};

class TraceExitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Classical RK4 for dX/dtau = V(X, tau) from tau = s to tau = t (t < s runs
// backward), with the divergence line integral carried as an extra state so
// it uses the same stages.
FlowTrace flow_map(const DriftSpec& V, const Grid& domain, double s, double t, const Vec2& x,
                   int n_rk, double exit_tol_rel = 1e-9, bool allow_exit = false);

// det of the flow-map Jacobian by central differences of displaced traces.
double fd_jacobian_det(const DriftSpec& V, const Grid& domain, double s, double t, const Vec2& x,
                       int n_rk, double step);

// Bilinear (1D: linear) interpolation of cell-centred data; coordinates are
// clamped to the outermost cell centres.
double interpolate(const ScalarField& f, const Vec2& x);

struct TransportOptions {
  int n_rk = 8;
  bool renormalize = true;
  ExitPolicy on_exit = ExitPolicy::fail;
  double exit_tol_rel = 1e-9;
};

struct Pushforward {
  DensityField field;
  double mass_defect = 0.0;  // (mass before renormalisation - source mass) / source mass
  int exited_traces = 0;
  double max_clamp = 0.0;
};

Pushforward pushforward(const DensityField& source, const DriftSpec& V, double s, double t,
                        const TransportOptions& opt = {});

struct PushforwardRelations {
  double entropy_output = 0.0;          // int rho log rho
  double entropy_predicted = 0.0;       // int src log src - int src log J
  double entropy_residual = 0.0;
  double lq_output = 0.0;
  double lq_bound = 0.0;                // ||src||_q exp((q-1)/q int ||div V||_inf)
  double lq_slack = 0.0;                // lq_bound - lq_output
  double divergence_sup_integral = 0.0;
};

PushforwardRelations pushforward_relations_report(const DensityField& source,
                                                  const DensityField& output, const DriftSpec& V,
                                                  double s, double t, double q, int n_rk);

}  // namespace fdlab
