#include "fdlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fdlab {

namespace {

void check_interval(const Interval& e) {
  if (!std::isfinite(e.lo) || !std::isfinite(e.hi) || !(e.hi > e.lo))
    throw std::invalid_argument("grid extent must be a finite interval with hi > lo");
}

}  // namespace

Grid Grid::line(Interval x, int nx) {
  check_interval(x);
  if (nx < 4) throw std::invalid_argument("grid needs at least 4 cells per axis");
  Grid g;
  g.dim_ = 1;
  g.n_ = {nx, 1};
  g.ext_ = {x, Interval{0.0, 1.0}};
  g.h_ = {x.length() / nx, 1.0};
  return g;
}

Grid Grid::box(Interval x, Interval y, int nx, int ny, Boundary boundary) {
  check_interval(x);
  check_interval(y);
  if (nx < 4 || ny < 4) throw std::invalid_argument("grid needs at least 4 cells per axis");
  Grid g;
  g.dim_ = 2;
  g.n_ = {nx, ny};
  g.ext_ = {x, y};
  g.h_ = {x.length() / nx, y.length() / ny};
  g.boundary_ = boundary;
  return g;
}

Vec2 Grid::center(std::size_t idx) const {
  const int i = int(idx % std::size_t(n_[0]));
  const int j = int(idx / std::size_t(n_[0]));
  return {center(0, i), dim_ == 2 ? center(1, j) : 0.0};
}

double Grid::measure() const {
  return dim_ == 2 ? ext_[0].length() * ext_[1].length() : ext_[0].length();
}

double Grid::diameter() const {
  return dim_ == 2 ? std::hypot(ext_[0].length(), ext_[1].length()) : ext_[0].length();
}

double Grid::min_spacing() const { return dim_ == 2 ? std::min(h_[0], h_[1]) : h_[0]; }

bool Grid::contains(const Vec2& x, double tol) const {
  for (int a = 0; a < dim_; ++a)
    if (x[a] < ext_[a].lo - tol || x[a] > ext_[a].hi + tol) return false;
  return true;
}

Vec2 Grid::clamp(const Vec2& x) const {
  Vec2 r = x;
  for (int a = 0; a < dim_; ++a) r[a] = std::clamp(x[a], ext_[a].lo, ext_[a].hi);
  return r;
}

DensityField::DensityField(Grid grid, std::vector<double> values, double time)
    : f_{std::move(grid), std::move(values)}, time_(time) {
  if (f_.values.size() != f_.grid.size())
    throw std::invalid_argument("density values do not match the grid size");
  for (double v : f_.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("density has a non-finite value");
    if (v < 0.0) throw std::invalid_argument("density has a negative value");
  }
}

DensityField DensityField::constant(const Grid& grid, double c, double time) {
  return DensityField(grid, std::vector<double>(grid.size(), c), time);
}

double DensityField::mass() const { return integrate(f_); }

DensityField DensityField::normalized() const {
  const double M = mass();
  if (!(M > 0.0)) throw std::invalid_argument("cannot normalize a field with zero mass");
  return scaled(1.0 / M);
}

DensityField DensityField::scaled(double factor) const {
  std::vector<double> v(f_.values);
  for (double& x : v) x *= factor;
  return DensityField(f_.grid, std::move(v), time_);
}

double integrate(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.cell_volume();
}

double integrate(const DensityField& f) { return integrate(f.scalar()); }

double lq_norm(const ScalarField& f, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("lq_norm needs q >= 1");
  if (std::isinf(q)) return sup_abs(f.values);
  double s = 0.0;
  for (double v : f.values) s += std::pow(std::abs(v), q);
  return std::pow(s * f.grid.cell_volume(), 1.0 / q);
}

double lq_norm(const DensityField& f, double q) { return lq_norm(f.scalar(), q); }

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double FaceGradient::squared_integral() const {
  double s = 0.0;
  for (double g : x) s += g * g;
  for (double g : y) s += g * g;
  return s * grid.cell_volume();
}

Vec2 FaceGradient::cell_average(int i, int j) const {
  Vec2 r{0.5 * (gx(i, j) + gx(i + 1, j)), 0.0};
  if (grid.dim() == 2) r[1] = 0.5 * (gy(i, j) + gy(i, j + 1));
  return r;
}

double FaceGradient::max_abs() const { return std::max(sup_abs(x), sup_abs(y)); }

FaceGradient face_gradient(const Grid& grid, std::span<const double> v) {
  const int nx = grid.cells(0), ny = grid.cells(1);
  FaceGradient g{grid, std::vector<double>(std::size_t(nx + 1) * ny, 0.0), {}};
  const double hx = grid.spacing(0);
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i)
      g.x[std::size_t(j) * (nx + 1) + i] = (v[grid.index(i, j)] - v[grid.index(i - 1, j)]) / hx;
  if (grid.dim() == 2) {
    const double hy = grid.spacing(1);
    g.y.assign(std::size_t(nx) * (ny + 1), 0.0);
    for (int j = 1; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        g.y[std::size_t(j) * nx + i] = (v[grid.index(i, j)] - v[grid.index(i, j - 1)]) / hy;
  }
  return g;
}

std::vector<double> power_floor(std::span<const double> v, double a, double floor,
                                double shift) {
  std::vector<double> r(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double b = std::max(v[k] + shift, floor);
    r[k] = b > 0.0 ? std::pow(b, a) : 0.0;
  }
  return r;
}

FaceGradient grad_power(const DensityField& f, double a, double floor) {
  if (!(a > 0.0)) throw std::invalid_argument("grad_power needs a > 0");
  const auto p = power_floor(f.values(), a, floor);
  return face_gradient(f.grid(), p);
}

std::vector<double> trapezoid_weights(std::span<const double> times) {
  std::vector<double> w(times.size(), 0.0);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double dt = times[k] - times[k - 1];
    w[k - 1] += 0.5 * dt;
    w[k] += 0.5 * dt;
  }
  return w;
}

double temporal_norm(std::span<const double> times, std::span<const double> values, double q) {
  if (times.size() != values.size() || times.empty())
    throw std::invalid_argument("temporal_norm needs matching non-empty samples");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw std::invalid_argument("sample times must increase");
  if (std::isinf(q)) return sup_abs(values);
  const auto w = trapezoid_weights(times);
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) s += w[k] * std::pow(std::abs(values[k]), q);
  return std::pow(s, 1.0 / q);
}

double mixed_norm(std::span<const TimeSample> series, const MixedNormSpec& spec) {
  if (series.empty()) throw std::invalid_argument("mixed_norm needs at least one sample");
  if (!(spec.q1 >= 1.0) || !(spec.q2 >= 1.0))
    throw std::invalid_argument("mixed_norm exponents must be >= 1");
  std::vector<double> times, inner;
  for (const auto& s : series) {
    if (!(s.field.grid == series.front().field.grid))
      throw std::invalid_argument("mixed_norm series uses more than one grid");
    times.push_back(s.time);
    inner.push_back(lq_norm(s.field, spec.q1));
  }
  if (series.size() == 1) {
    if (!std::isinf(spec.q2)) throw std::invalid_argument("finite q2 needs at least two samples");
    return inner.front();
  }
  return temporal_norm(times, inner, spec.q2);
}

}  // namespace fdlab
