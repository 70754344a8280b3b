#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fdlab/drift.hpp"
#include "fdlab/fields.hpp"
#include "fdlab/trajectory.hpp"

namespace fdlab {

struct DiscreteMeasure {
  int dim = 1;
  std::vector<Vec2> support;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  // Throws unless weights are nonnegative and sum to 1 within 1e-12.
  void validate() const;
  // Atoms at cell centres carrying cell masses, normalised to unit mass.
  static DiscreteMeasure from_density(const DensityField& f);
};

struct TransportPlan {
  int rows = 0, cols = 0;
  struct Entry {
    int i, j;
    double mass;
  };
  std::vector<Entry> entries;  // nonzero couplings
  double cost = 0.0;           // sum mass |x_i - y_j|^p
  double marginal_error(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const;
};

// Exact 1D quadratic distance through the monotone (quantile) coupling.
double w2_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
// Same for cellwise-constant densities on one 1D grid: quantile functions
// are piecewise linear and the integral is evaluated exactly piece by piece.
double w2_1d_density(const DensityField& a, const DensityField& b);

class TooManyAtoms : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExactTransport {
  double value = 0.0;  // W_p = cost^(1/p)
  TransportPlan plan;
  int pivots = 0;
};
// Network simplex on the complete bipartite graph (transportation problem).
ExactTransport wp_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                        std::size_t cap = 1024);

// Debiased entropic value (S_reg)^(1/p), S = OT - (OT_mu + OT_nu)/2, by
// log-domain Sinkhorn. Throws when the marginals do not converge.
double wp_entropic(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p, double reg,
                   int iters = 5000, double tol = 1e-9);

// Aggregates blocks of cells (mass-conservative) so each axis has at most
// max_cells cells; axes must be divisible by the block size chosen.
DensityField coarsen(const DensityField& f, int max_cells = 32);
// W_2 of two densities on one grid: exact 1D quantile formula, or exact
// transport after coarsening to <= 32^2 in 2D.
double w2_density(const DensityField& a, const DensityField& b);

struct DeltaDistance {
  double value = 0.0;
  double tail_bound = 0.0;  // 2 * 2^-K
  int K = 0;
};
// Sum_{k<=K} 2^-k |int f_k d(mu - nu)| with f_k = c_k sin(k pi X) in 1D and
// the diagonal enumeration of sin(a pi X) sin(b pi Y) in 2D, normalised so
// max(|f|, |grad f|) <= 1. X, Y are unit coordinates of the domain.
DeltaDistance delta_distance(const DensityField& a, const DensityField& b, int K = 16);
DeltaDistance delta_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Grid& domain,
                             int K = 16);
// k-th member of the family (k >= 1) and its normalisation.
double delta_test_function(const Grid& domain, int k, const Vec2& x);

enum class DistanceKind { w2, delta };

struct PairDistance {
  double s = 0.0, t = 0.0, value = 0.0;
};
struct HolderFit {
  bool stationary = false;
  double exponent = 0.0;
  double constant = 0.0;     // fitted C in C gap^a on the upper envelope
  double residual = 0.0;     // rms of the log fit
  double r_squared = 0.0;
  int gaps = 0;
  std::vector<PairDistance> pairs;
  std::vector<std::pair<double, double>> envelope;  // (gap, max distance)
  // smallest C with d <= C gap^a over all pairs, for a given exponent
  double majorant(double a) const;
};
// 1..8 then the powers of two below the snapshot count.
std::vector<int> default_strides(std::size_t snapshots);
std::vector<PairDistance> pair_distances(const TrajectoryRecord& traj, DistanceKind kind,
                                         const std::vector<int>& strides, int delta_K = 16);
HolderFit holder_fit(std::vector<PairDistance> pairs);
HolderFit holder_fit(const TrajectoryRecord& traj, DistanceKind kind,
                     const std::vector<int>& strides, int delta_K = 16);

struct SpeedPair {
  double s = 0.0, t = 0.0;
  double distance = 0.0;  // W_2(rho(s), rho(t))
  double bound = 0.0;     // int_s^t ||w||_{L^2(rho)}
  double slack = 0.0;     // bound - distance
  bool violated = false;  // slack < -budget
};
struct MetricSpeedReport {
  std::vector<double> speed;  // ||w(t)||_{L^2(rho(t))} per snapshot
  std::vector<SpeedPair> pairs;
  double budget = 0.0;
  int violations = 0;
};
// w = (-grad (eps+rho)^m + V rho) / rho evaluated on faces.
double metric_speed_at(const DensityField& f, const DriftSpec& V, double m, double eps);
MetricSpeedReport metric_speed(const TrajectoryRecord& traj, const DriftSpec& V, double m, double eps,
                               const std::vector<int>& strides);

}  // namespace fdlab
