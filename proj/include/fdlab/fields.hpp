#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fdlab {

using Vec2 = std::array<double, 2>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Boundary { neumann, periodic };

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

// Uniform cell-centred grid in one or two dimensions. Cell (i, j) has its
// centre at (x.lo + (i + 1/2) hx, y.lo + (j + 1/2) hy); values are stored
// with x varying fastest, i.e. a row-major (ny, nx) array.
class Grid {
 public:
  Grid() = default;
  static Grid line(Interval x, int nx);
  static Grid box(Interval x, Interval y, int nx, int ny,
                  Boundary boundary = Boundary::neumann);

  int dim() const { return dim_; }
  int cells(int axis) const { return n_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  const Interval& extent(int axis) const { return ext_[axis]; }
  Boundary boundary() const { return boundary_; }

  std::size_t size() const { return std::size_t(n_[0]) * std::size_t(n_[1]); }
  std::size_t index(int i, int j = 0) const {
    return std::size_t(j) * std::size_t(n_[0]) + std::size_t(i);
  }
  double center(int axis, int k) const { return ext_[axis].lo + (k + 0.5) * h_[axis]; }
  Vec2 center(std::size_t idx) const;

  double cell_volume() const { return dim_ == 2 ? h_[0] * h_[1] : h_[0]; }
  double measure() const;
  double diameter() const;
  double min_spacing() const;
  bool contains(const Vec2& x, double tol = 0.0) const;
  Vec2 clamp(const Vec2& x) const;

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && ext_ == o.ext_ && boundary_ == o.boundary_;
  }

 private:
  int dim_ = 1;
  std::array<int, 2> n_{4, 1};
  std::array<double, 2> h_{0.25, 1.0};
  std::array<Interval, 2> ext_{Interval{0, 1}, Interval{0, 1}};
  Boundary boundary_ = Boundary::neumann;
};

// A grid function of arbitrary sign.
struct ScalarField {
  Grid grid;
  std::vector<double> values;
};

// Nonnegative, finite grid function with an optional time tag.
class DensityField {
 public:
  DensityField() = default;
  DensityField(Grid grid, std::vector<double> values, double time = 0.0);

  static DensityField constant(const Grid& grid, double c, double time = 0.0);

  const Grid& grid() const { return f_.grid; }
  std::span<const double> values() const { return f_.values; }
  const std::vector<double>& data() const { return f_.values; }
  double operator[](std::size_t i) const { return f_.values[i]; }
  std::size_t size() const { return f_.values.size(); }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }
  const ScalarField& scalar() const { return f_; }

  double mass() const;
  // Scales to unit mass; throws if the mass is zero.
  DensityField normalized() const;
  DensityField scaled(double factor) const;

 private:
  ScalarField f_;
  double time_ = 0.0;
};

double integrate(const ScalarField& f);
double integrate(const DensityField& f);
double lq_norm(const ScalarField& f, double q);
double lq_norm(const DensityField& f, double q);
double sup_abs(std::span<const double> v);

// Face-staggered gradient. `x` holds (nx+1)*ny entries (face i sits left of
// cell i), `y` holds nx*(ny+1) entries; boundary faces carry zero flux.
struct FaceGradient {
  Grid grid;
  std::vector<double> x;
  std::vector<double> y;

  double gx(int i, int j) const { return x[std::size_t(j) * (grid.cells(0) + 1) + i]; }
  double gy(int i, int j) const { return y[std::size_t(j) * grid.cells(0) + i]; }
  // Sum over faces of |g|^2 times the cell volume.
  double squared_integral() const;
  // Cell-centred vector obtained by averaging the two adjacent faces per axis.
  Vec2 cell_average(int i, int j) const;
  double max_abs() const;
};

FaceGradient face_gradient(const Grid& grid, std::span<const double> v);
// Gradient of max(v, floor)^a on faces; 0^a := 0.
FaceGradient grad_power(const DensityField& f, double a, double floor = 0.0);
// Pointwise power with floor, used to build energy integrands.
std::vector<double> power_floor(std::span<const double> v, double a, double floor,
                                double shift = 0.0);

// Mixed space-time norm: q1 in space, q2 in time (kInf allowed for either).
struct MixedNormSpec {
  double q1 = 2.0;
  double q2 = 2.0;
};

struct TimeSample {
  double time;
  ScalarField field;
};

double mixed_norm(std::span<const TimeSample> series, const MixedNormSpec& spec);
// Trapezoid weights for a strictly increasing list of sample times.
std::vector<double> trapezoid_weights(std::span<const double> times);
// Temporal q-norm of a sampled nonnegative function (trapezoid, kInf = max).
double temporal_norm(std::span<const double> times, std::span<const double> values, double q);

}  // namespace fdlab
