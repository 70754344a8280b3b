#include "fdlab/drift.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fdlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Smooth cutoff: 1 on [0, r0], 0 beyond r1, quintic smoothstep between.
void cutoff(double r, double r0, double r1, double& S, double& dS) {
  if (!std::isfinite(r0) || r <= r0) {
    S = 1.0;
    dS = 0.0;
    return;
  }
  if (r >= r1) {
    S = 0.0;
    dS = 0.0;
    return;
  }
  const double w = r1 - r0;
  const double t = (r - r0) / w;
  S = 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
  dS = -30.0 * t * t * (1.0 - t) * (1.0 - t) / w;
}

struct Lattice1 {
  int i0;
  double frac;
};

// Position of x on a node lattice lo + (k + off) h, k in [kmin, kmax].
Lattice1 locate(double x, double lo, double h, double off, int kmin, int kmax) {
  double s = (x - lo) / h - off;
  s = std::clamp(s, double(kmin), double(kmax));
  int i = int(std::floor(s));
  if (i >= kmax) i = kmax - 1;
  if (i < kmin) i = kmin;
  return {i, s - i};
}

}  // namespace

// u lives at (lo_x + i hx, lo_y + (j + 1/2) hy), i in [0, nx], j in [0, ny);
// rows j = -1 and j = ny are ghosts (odd reflection for no-slip walls, wrap
// for periodic), so the interpolant vanishes on the walls.
namespace {

double u_at(const StaggeredVelocity& s, int i, int j) {
  const Grid& g = s.grid;
  const int nx = g.cells(0), ny = g.cells(1);
  const bool per = g.boundary() == Boundary::periodic;
  if (j < 0) return per ? s.u[std::size_t(ny - 1) * (nx + 1) + i] : -s.u[std::size_t(i)];
  if (j >= ny) return per ? s.u[std::size_t(i)] : -s.u[std::size_t(ny - 1) * (nx + 1) + i];
  return s.u[std::size_t(j) * (nx + 1) + i];
}

double v_at(const StaggeredVelocity& s, int i, int j) {
  const Grid& g = s.grid;
  const int nx = g.cells(0);
  const bool per = g.boundary() == Boundary::periodic;
  if (i < 0) return per ? s.v[std::size_t(j) * nx + nx - 1] : -s.v[std::size_t(j) * nx];
  if (i >= nx) return per ? s.v[std::size_t(j) * nx] : -s.v[std::size_t(j) * nx + nx - 1];
  return s.v[std::size_t(j) * nx + i];
}

}  // namespace

Vec2 StaggeredVelocity::eval(const Vec2& p) const {
  const Grid& g = grid;
  const int nx = g.cells(0), ny = g.cells(1);
  const double hx = g.spacing(0), hy = g.spacing(1);
  const Vec2 x = g.clamp(p);
  const auto ax = locate(x[0], g.extent(0).lo, hx, 0.0, 0, nx);
  const auto ay = locate(x[1], g.extent(1).lo, hy, 0.5, -1, ny);
  const double u00 = u_at(*this, ax.i0, ay.i0), u10 = u_at(*this, ax.i0 + 1, ay.i0);
  const double u01 = u_at(*this, ax.i0, ay.i0 + 1), u11 = u_at(*this, ax.i0 + 1, ay.i0 + 1);
  const double uu = (1 - ax.frac) * (1 - ay.frac) * u00 + ax.frac * (1 - ay.frac) * u10 +
                    (1 - ax.frac) * ay.frac * u01 + ax.frac * ay.frac * u11;
  const auto bx = locate(x[0], g.extent(0).lo, hx, 0.5, -1, nx);
  const auto by = locate(x[1], g.extent(1).lo, hy, 0.0, 0, ny);
  const double v00 = v_at(*this, bx.i0, by.i0), v10 = v_at(*this, bx.i0 + 1, by.i0);
  const double v01 = v_at(*this, bx.i0, by.i0 + 1), v11 = v_at(*this, bx.i0 + 1, by.i0 + 1);
  const double vv = (1 - bx.frac) * (1 - by.frac) * v00 + bx.frac * (1 - by.frac) * v10 +
                    (1 - bx.frac) * by.frac * v01 + bx.frac * by.frac * v11;
  return {uu, vv};
}

double StaggeredVelocity::divergence(const Vec2& p) const {
  const Grid& g = grid;
  const int nx = g.cells(0), ny = g.cells(1);
  const double hx = g.spacing(0), hy = g.spacing(1);
  const Vec2 x = g.clamp(p);
  const auto ax = locate(x[0], g.extent(0).lo, hx, 0.0, 0, nx);
  const auto ay = locate(x[1], g.extent(1).lo, hy, 0.5, -1, ny);
  const double dudx =
      ((1 - ay.frac) * (u_at(*this, ax.i0 + 1, ay.i0) - u_at(*this, ax.i0, ay.i0)) +
       ay.frac * (u_at(*this, ax.i0 + 1, ay.i0 + 1) - u_at(*this, ax.i0, ay.i0 + 1))) /
      hx;
  const auto bx = locate(x[0], g.extent(0).lo, hx, 0.5, -1, nx);
  const auto by = locate(x[1], g.extent(1).lo, hy, 0.0, 0, ny);
  const double dvdy =
      ((1 - bx.frac) * (v_at(*this, bx.i0, by.i0 + 1) - v_at(*this, bx.i0, by.i0)) +
       bx.frac * (v_at(*this, bx.i0 + 1, by.i0 + 1) - v_at(*this, bx.i0 + 1, by.i0))) /
      hy;
  return dudx + dvdy;
}

DriftSpec DriftSpec::zero(int dim) {
  DriftSpec V;
  V.kind_ = Kind::zero;
  V.dim_ = dim;
  return V;
}

DriftSpec DriftSpec::constant(int dim, Vec2 c) {
  DriftSpec V;
  V.kind_ = Kind::constant;
  V.dim_ = dim;
  V.vec = c;
  if (dim == 1) V.vec[1] = 0.0;
  V.declare(true, c[0] == 0.0 && c[1] == 0.0);
  return V;
}

DriftSpec DriftSpec::shear(double s, double y0, bool windowed, Interval xwin) {
  DriftSpec V;
  V.kind_ = Kind::shear;
  V.dim_ = 2;
  V.a = s;
  V.b = y0;
  V.windowed = windowed;
  V.box_x = xwin;
  V.declare(!windowed || s == 0.0, windowed || s == 0.0);
  return V;
}

DriftSpec DriftSpec::rigid_rotation(double omega, Vec2 center, double r0, double r1) {
  if (std::isfinite(r1) && !(r1 > r0)) throw std::invalid_argument("rotation cutoff needs r1 > r0");
  if (!std::isfinite(r1) && std::isfinite(r0))
    throw std::invalid_argument("rotation cutoff needs both radii");
  DriftSpec V;
  V.kind_ = Kind::rigid_rotation;
  V.dim_ = 2;
  V.a = omega;
  V.vec = center;
  V.r0 = r0;
  V.r1 = r1;
  V.declare(true, std::isfinite(r1) || omega == 0.0);
  return V;
}

DriftSpec DriftSpec::potential_quadratic(int dim, double alpha, Vec2 center) {
  DriftSpec V;
  V.kind_ = Kind::potential_quadratic;
  V.dim_ = dim;
  V.a = alpha;
  V.vec = center;
  if (dim == 1) V.vec[1] = 0.0;
  V.declare(alpha == 0.0, alpha == 0.0);
  return V;
}

DriftSpec DriftSpec::potential_cosine(int dim, double amplitude, int k, Interval x, Interval y) {
  if (k < 1) throw std::invalid_argument("cosine potential needs k >= 1");
  DriftSpec V;
  V.kind_ = Kind::potential_cosine;
  V.dim_ = dim;
  V.a = amplitude;
  V.k1 = k;
  V.box_x = x;
  V.box_y = y;
  V.declare(amplitude == 0.0, true);
  return V;
}

DriftSpec DriftSpec::stream_function(double amplitude, int kx, int ky, Interval x, Interval y) {
  if (kx < 1 || ky < 1) throw std::invalid_argument("stream function needs kx, ky >= 1");
  DriftSpec V;
  V.kind_ = Kind::stream_function;
  V.dim_ = 2;
  V.a = amplitude;
  V.k1 = kx;
  V.k2 = ky;
  V.box_x = x;
  V.box_y = y;
  V.declare(true, true);
  return V;
}

DriftSpec DriftSpec::time_modulated(const DriftSpec& in, double offset, double amp, double freq) {
  DriftSpec V;
  V.kind_ = Kind::time_modulated;
  V.dim_ = in.dim();
  V.inner = std::make_shared<const DriftSpec>(in);
  V.mod_offset = offset;
  V.mod_amp = amp;
  V.mod_freq = freq;
  V.declare(in.declared_divergence_free(), in.declared_zero_normal_flux());
  return V;
}

DriftSpec DriftSpec::staggered(std::shared_ptr<const StaggeredVelocity> f) {
  DriftSpec V;
  V.kind_ = Kind::staggered;
  V.dim_ = 2;
  V.field = std::move(f);
  V.declare(false, true);
  return V;
}

std::string DriftSpec::kind_name() const {
  switch (kind_) {
    case Kind::zero: return "zero";
    case Kind::constant: return "constant";
    case Kind::shear: return "shear";
    case Kind::rigid_rotation: return "rigid_rotation";
    case Kind::potential_quadratic: return "potential_quadratic";
    case Kind::potential_cosine: return "potential_cosine";
    case Kind::stream_function: return "stream_function";
    case Kind::time_modulated: return "time_modulated";
    case Kind::staggered: return "staggered";
  }
  return "unknown";
}

Vec2 DriftSpec::evaluate(const Vec2& x, double t) const {
  switch (kind_) {
    case Kind::zero: return {0.0, 0.0};
    case Kind::constant: return vec;
    case Kind::shear: {
      const double w = windowed ? std::sin(kPi * (x[0] - box_x.lo) / box_x.length()) : 1.0;
      return {a * (x[1] - b) * w, 0.0};
    }
    case Kind::rigid_rotation: {
      const double dx = x[0] - vec[0], dy = x[1] - vec[1];
      double S, dS;
      cutoff(std::hypot(dx, dy), r0, r1, S, dS);
      return {-a * S * dy, a * S * dx};
    }
    case Kind::potential_quadratic:
      return {a * (x[0] - vec[0]), dim_ == 2 ? a * (x[1] - vec[1]) : 0.0};
    case Kind::potential_cosine: {
      const double cx = k1 * kPi / box_x.length();
      Vec2 r{-a * cx * std::sin(cx * (x[0] - box_x.lo)), 0.0};
      if (dim_ == 2) {
        const double cy = k1 * kPi / box_y.length();
        r[1] = -a * cy * std::sin(cy * (x[1] - box_y.lo));
      }
      return r;
    }
    case Kind::stream_function: {
      const double ax = k1 * kPi / box_x.length(), ay = k2 * kPi / box_y.length();
      const double X = ax * (x[0] - box_x.lo), Y = ay * (x[1] - box_y.lo);
      return {a * ay * std::sin(X) * std::cos(Y), -a * ax * std::cos(X) * std::sin(Y)};
    }
    case Kind::time_modulated: {
      const double s = mod_offset + mod_amp * std::sin(2.0 * kPi * mod_freq * t);
      const Vec2 v = inner->evaluate(x, t);
      return {s * v[0], s * v[1]};
    }
    case Kind::staggered: return field->eval(x);
  }
  return {0.0, 0.0};
}

double DriftSpec::divergence(const Vec2& x, double t) const {
  switch (kind_) {
    case Kind::zero:
    case Kind::constant:
    case Kind::rigid_rotation:
    case Kind::stream_function: return 0.0;
    case Kind::shear: {
      if (!windowed) return 0.0;
      const double c = kPi / box_x.length();
      return a * (x[1] - b) * c * std::cos(c * (x[0] - box_x.lo));
    }
    case Kind::potential_quadratic: return dim_ * a;
    case Kind::potential_cosine: {
      const double cx = k1 * kPi / box_x.length();
      double d = -a * cx * cx * std::cos(cx * (x[0] - box_x.lo));
      if (dim_ == 2) {
        const double cy = k1 * kPi / box_y.length();
        d -= a * cy * cy * std::cos(cy * (x[1] - box_y.lo));
      }
      return d;
    }
    case Kind::time_modulated: {
      const double s = mod_offset + mod_amp * std::sin(2.0 * kPi * mod_freq * t);
      return s * inner->divergence(x, t);
    }
    case Kind::staggered: return field->divergence(x);
  }
  return 0.0;
}

Mat2 DriftSpec::jacobian(const Vec2& x, double t) const {
  Mat2 J{};
  switch (kind_) {
    case Kind::zero:
    case Kind::constant: return J;
    case Kind::shear: {
      if (windowed) {
        const double c = kPi / box_x.length();
        const double X = c * (x[0] - box_x.lo);
        J[0][0] = a * (x[1] - b) * c * std::cos(X);
        J[0][1] = a * std::sin(X);
      } else {
        J[0][1] = a;
      }
      return J;
    }
    case Kind::rigid_rotation: {
      const double dx = x[0] - vec[0], dy = x[1] - vec[1];
      const double r = std::hypot(dx, dy);
      double S, dS;
      cutoff(r, r0, r1, S, dS);
      const double ex = r > 0 ? dx / r : 0.0, ey = r > 0 ? dy / r : 0.0;
      J[0][0] = -a * dS * ex * dy;
      J[0][1] = -a * (dS * ey * dy + S);
      J[1][0] = a * (dS * ex * dx + S);
      J[1][1] = a * dS * ey * dx;
      return J;
    }
    case Kind::potential_quadratic:
      J[0][0] = a;
      if (dim_ == 2) J[1][1] = a;
      return J;
    case Kind::potential_cosine: {
      const double cx = k1 * kPi / box_x.length();
      J[0][0] = -a * cx * cx * std::cos(cx * (x[0] - box_x.lo));
      if (dim_ == 2) {
        const double cy = k1 * kPi / box_y.length();
        J[1][1] = -a * cy * cy * std::cos(cy * (x[1] - box_y.lo));
      }
      return J;
    }
    case Kind::stream_function: {
      const double ax = k1 * kPi / box_x.length(), ay = k2 * kPi / box_y.length();
      const double X = ax * (x[0] - box_x.lo), Y = ay * (x[1] - box_y.lo);
      J[0][0] = a * ay * ax * std::cos(X) * std::cos(Y);
      J[0][1] = -a * ay * ay * std::sin(X) * std::sin(Y);
      J[1][0] = a * ax * ax * std::sin(X) * std::sin(Y);
      J[1][1] = -a * ax * ay * std::cos(X) * std::cos(Y);
      return J;
    }
    case Kind::time_modulated: {
      const double s = mod_offset + mod_amp * std::sin(2.0 * kPi * mod_freq * t);
      J = inner->jacobian(x, t);
      for (auto& row : J)
        for (double& e : row) e *= s;
      return J;
    }
    case Kind::staggered: return jacobian_fd(x, t, 1e-6 * field->grid.min_spacing());
  }
  return J;
}

Mat2 DriftSpec::jacobian_fd(const Vec2& x, double t, double step) const {
  Mat2 J{};
  for (int k = 0; k < dim_; ++k) {
    Vec2 xp = x, xm = x;
    xp[k] += step;
    xm[k] -= step;
    const Vec2 vp = evaluate(xp, t), vm = evaluate(xm, t);
    for (int i = 0; i < dim_; ++i) J[i][k] = (vp[i] - vm[i]) / (2.0 * step);
  }
  return J;
}

DeclarationCheck check_declarations(const DriftSpec& V, const Grid& domain, double T,
                                    int probe_cells, int time_samples) {
  DeclarationCheck c;
  const int d = domain.dim();
  const Grid probe = d == 2 ? Grid::box(domain.extent(0), domain.extent(1), probe_cells, probe_cells)
                            : Grid::line(domain.extent(0), probe_cells);
  for (int s = 0; s < time_samples; ++s) {
    const double t = time_samples > 1 ? T * s / (time_samples - 1) : 0.0;
    for (std::size_t k = 0; k < probe.size(); ++k) {
      const Vec2 x = probe.center(k);
      const Vec2 v = V.evaluate(x, t);
      c.max_speed = std::max(c.max_speed, std::hypot(v[0], v[1]));
      c.max_divergence = std::max(c.max_divergence, std::abs(V.divergence(x, t)));
      const Mat2 J = V.jacobian(x, t);
      c.max_gradient = std::max(c.max_gradient, std::sqrt(J[0][0] * J[0][0] + J[0][1] * J[0][1] +
                                                          J[1][0] * J[1][0] + J[1][1] * J[1][1]));
    }
    // Boundary samples: face midpoints of the probe grid on each wall.
    for (int axis = 0; axis < d; ++axis) {
      const int other = 1 - axis;
      const int nb = d == 2 ? probe.cells(other) : 1;
      for (int side = 0; side < 2; ++side)
        for (int k = 0; k < nb; ++k) {
          Vec2 x{0.0, 0.0};
          x[axis] = side == 0 ? domain.extent(axis).lo : domain.extent(axis).hi;
          if (d == 2) x[other] = probe.center(other, k);
          const Vec2 v = V.evaluate(x, t);
          c.max_speed = std::max(c.max_speed, std::hypot(v[0], v[1]));
          c.max_normal_flux = std::max(c.max_normal_flux, std::abs(v[axis]));
        }
    }
  }
  c.divergence_free_ok = c.max_divergence <= 1e-12 * (1.0 + c.max_gradient);
  c.zero_flux_ok = c.max_normal_flux <= 1e-12 * c.max_speed;
  return c;
}

std::string class_name(DriftClass c) {
  switch (c) {
    case DriftClass::S: return "S";
    case DriftClass::S_tilde: return "S_tilde";
    case DriftClass::D: return "D";
    case DriftClass::D_plus: return "D_plus";
    case DriftClass::D_s: return "D_s";
  }
  return "?";
}

DriftClass class_from_name(const std::string& s) {
  if (s == "S") return DriftClass::S;
  if (s == "S_tilde") return DriftClass::S_tilde;
  if (s == "D") return DriftClass::D;
  if (s == "D_plus") return DriftClass::D_plus;
  if (s == "D_s") return DriftClass::D_s;
  throw std::invalid_argument("unknown drift class '" + s + "' (S, S_tilde, D, D_plus, D_s)");
}

namespace {
double inv(double q) { return std::isinf(q) ? 0.0 : 1.0 / q; }
}  // namespace

ClassLine class_line(DriftClass c, int d, double m, double q, const MixedNormSpec& e) {
  ClassLine L{};
  const double qmd = d * (m - 1.0) / q;
  switch (c) {
    case DriftClass::S:
      L.lhs = d * inv(e.q1) + (2.0 + d * (q + m - 2.0)) * inv(e.q2);
      L.rhs = 1.0 + d * (m - 1.0);
      L.m_lo = 1.0 - 1.0 / d;
      L.m_hi = 1.0;
      L.m_lo_inclusive = true;
      L.allows_pme = false;
      break;
    case DriftClass::S_tilde:
      L.lhs = d * inv(e.q1) + (2.0 + d * (q + m - 2.0)) * inv(e.q2);
      L.rhs = 2.0 + d * (m - 1.0);
      L.m_lo = std::max(0.0, 1.0 - 2.0 / d);
      L.m_hi = 1.0;
      L.m_lo_inclusive = true;
      L.allows_pme = false;
      break;
    case DriftClass::D:
    case DriftClass::D_plus:
    case DriftClass::D_s:
      L.lhs = d * inv(e.q1) + (2.0 + qmd) * inv(e.q2);
      L.rhs = c == DriftClass::D_s ? 1.0 + d * (q + m - 2.0) / (2.0 * q)
                                   : 2.0 + d * (q + m - 2.0) / q;
      L.m_lo = std::max(0.0, 1.0 - 2.0 * q / d);
      L.m_hi = 1.0;
      L.m_lo_inclusive = true;
      L.allows_pme = true;
      break;
  }
  return L;
}

double drift_mixed_norm(const DriftSpec& V, const MixedNormSpec& spec, const ClassifyContext& ctx,
                        bool gradient) {
  const Grid& dom = ctx.domain;
  const Grid probe =
      dom.dim() == 2 ? Grid::box(dom.extent(0), dom.extent(1), ctx.probe_cells, ctx.probe_cells)
                     : Grid::line(dom.extent(0), ctx.probe_cells);
  const int nt = std::max(2, ctx.time_samples);
  std::vector<TimeSample> series;
  series.reserve(nt);
  const double step = 1e-6 * probe.min_spacing();
  for (int s = 0; s < nt; ++s) {
    const double t = ctx.T * s / (nt - 1);
    ScalarField f{probe, std::vector<double>(probe.size())};
    for (std::size_t k = 0; k < probe.size(); ++k) {
      const Vec2 x = probe.center(k);
      if (gradient) {
        const Mat2 J = V.has_analytic_jacobian() ? V.jacobian(x, t) : V.jacobian_fd(x, t, step);
        f.values[k] = std::sqrt(J[0][0] * J[0][0] + J[0][1] * J[0][1] + J[1][0] * J[1][0] +
                                J[1][1] * J[1][1]);
      } else {
        const Vec2 v = V.evaluate(x, t);
        f.values[k] = std::hypot(v[0], v[1]);
      }
    }
    series.push_back({t, std::move(f)});
  }
  return mixed_norm(series, spec);
}

DriftClassReport classify(const DriftSpec& V, double m, double q, const MixedNormSpec& spec,
                          DriftClass class_tag, const ClassifyContext& ctx) {
  if (!(q >= 1.0)) throw std::invalid_argument("classify needs q >= 1");
  if (!(m > 0.0)) throw std::invalid_argument("classify needs m > 0");
  if (!(spec.q1 > 1.0) || !(spec.q2 > 1.0))
    throw std::invalid_argument("class exponents q1, q2 must lie in (1, inf]");
  const int d = ctx.domain.dim();
  DriftClassReport r;
  r.class_tag = class_tag;
  r.dim = d;
  r.m = m;
  r.q = q;
  r.exponents = spec;
  const ClassLine L = class_line(class_tag, d, m, q, spec);
  r.lhs = L.lhs;
  r.rhs = L.rhs;
  const bool below = L.m_lo_inclusive ? m >= L.m_lo - 1e-15 : m > L.m_lo;
  r.m_in_range = (below && m < L.m_hi) || (L.allows_pme && m > 1.0);
  const bool is_d = class_tag == DriftClass::D || class_tag == DriftClass::D_plus ||
                    class_tag == DriftClass::D_s;
  r.norm = drift_mixed_norm(V, spec, ctx, class_tag == DriftClass::S_tilde);
  const double tol = 1e-12 * std::max(1.0, std::abs(L.rhs));
  const bool strict = class_tag == DriftClass::D_plus;
  const bool inequality = strict ? L.lhs < L.rhs - tol : L.lhs <= L.rhs + tol;
  r.critical = !strict && std::abs(L.lhs - L.rhs) <= tol;
  // The zero field lies in every mixed-norm class whatever the exponents.
  const bool vanishing = r.norm == 0.0 && V.kind() == DriftSpec::Kind::zero;
  r.member = (inequality || vanishing) && std::isfinite(r.norm) && r.m_in_range;
  if (!r.m_in_range) r.note = "m outside the admissible range of the class";
  if (is_d && !V.declared_divergence_free()) {
    r.member = false;
    r.note = "class requires a divergence-free drift";
  }
  if (!V.declared_zero_normal_flux() && r.norm > 0.0) {
    r.member = false;
    r.note = "class requires zero normal flux on the boundary";
  }
  if (r.member && r.critical) r.note = "critical: equality in the scaling condition";
  if (!inequality && r.note.empty()) r.note = vanishing ? "zero drift" : "scaling condition violated";
  return r;
}

double delta_exponent(int d, double m, double q, const MixedNormSpec& e) {
  const double qmd = d * (m - 1.0) / q;
  const double num = 2.0 + d * (q + m - 2.0) / q - (d * inv(e.q1) + (2.0 + qmd) * inv(e.q2));
  return std::min(0.5, num / (2.0 + qmd));
}

}  // namespace fdlab
