#include "fdlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fdlab/diffusion.hpp"

namespace fdlab {

double entropy(const DensityField& f, double floor) {
  double s = 0.0;
  for (double v : f.values())
    if (v > 0.0) s += v * std::log(std::max(v, floor));
  return s * f.grid().cell_volume();
}

double abs_entropy(const DensityField& f, double floor) {
  double s = 0.0;
  for (double v : f.values())
    if (v > 0.0) s += v * std::abs(std::log(std::max(v, floor)));
  return s * f.grid().cell_volume();
}

double fisher_speed_direct(const DensityField& f, double m, double eps) {
  const Grid& g = f.grid();
  std::vector<double> p(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) p[k] = f[k] > 0.0 ? std::pow(f[k], m) : 0.0;
  const int nx = g.cells(0), ny = g.cells(1);
  double s = 0.0;
  auto add = [&](std::size_t a, std::size_t b, double h) {
    const double gr = (p[b] - p[a]) / h;
    if (gr == 0.0) return;
    const double rho = std::max(0.5 * (f[a] + f[b]), eps);
    s += rho > 0.0 ? gr * gr / rho : kInf;
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) add(g.index(i - 1, j), g.index(i, j), g.spacing(0));
  if (g.dim() == 2)
    for (int j = 1; j < ny; ++j)
      for (int i = 0; i < nx; ++i) add(g.index(i, j - 1), g.index(i, j), g.spacing(1));
  return s * g.cell_volume();
}

double fisher_speed(const DensityField& f, double m, double eps) {
  if (!(m > 0.0)) throw std::invalid_argument("fisher_speed needs m > 0");
  if (m > 0.5) {
    const double a = m - 0.5;
    return (m / a) * (m / a) * grad_power(f, a, eps).squared_integral();
  }
  return fisher_speed_direct(f, m, eps);
}

double drift_speed(const DensityField& f, const DriftSpec& V) {
  const Grid& g = f.grid();
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f[k] == 0.0) continue;
    const Vec2 v = V.evaluate(g.center(k), f.time());
    s += (v[0] * v[0] + (g.dim() == 2 ? v[1] * v[1] : 0.0)) * f[k];
  }
  return s * g.cell_volume();
}

namespace {

DensityField shifted(const DensityField& f, double eps) {
  if (eps == 0.0) return f;
  std::vector<double> v(f.data());
  for (double& x : v) x += eps;
  return DensityField(f.grid(), std::move(v), f.time());
}

double shifted_power_integral(const DensityField& f, double eps, double q) {
  double s = 0.0;
  for (double v : f.values()) s += std::pow(eps + v, q);
  return s * f.grid().cell_volume();
}

double shifted_gradient_energy(const DensityField& f, double eps, double a) {
  return face_gradient(f.grid(), power_floor(f.values(), a, 0.0, eps)).squared_integral();
}

double sup_divergence(const DriftSpec& V, const Grid& g, double t) {
  double m = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) m = std::max(m, std::abs(V.divergence(g.center(k), t)));
  return m;
}

double time_integral(std::span<const double> times, std::span<const double> values) {
  const auto w = trapezoid_weights(times);
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * values[k];
  return s;
}

// Right-endpoint rule, the quadrature an implicit step dissipates with.
double implicit_time_integral(std::span<const double> times, std::span<const double> values) {
  double s = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) s += (times[k] - times[k - 1]) * values[k];
  return s;
}

}  // namespace

std::vector<double> TrajectoryRecord::times() const {
  std::vector<double> t;
  t.reserve(snapshots.size());
  for (const auto& s : snapshots) t.push_back(s.time());
  return t;
}

std::size_t TrajectoryRecord::find(double t) const {
  const double tol = 1e-9 * std::max(1.0, std::abs(horizon()));
  for (std::size_t k = 0; k < snapshots.size(); ++k)
    if (std::abs(snapshots[k].time() - t) <= tol) return k;
  return npos;
}

DiagnosticsRow diagnostics_row(const DensityField& f, const DriftSpec& V, double m, double eps,
                               double q) {
  DiagnosticsRow r;
  r.time = f.time();
  r.mass = f.mass();
  r.entropy = entropy(f);
  r.lq_norm = lq_norm(f, q);
  r.grad_energy = shifted_gradient_energy(f, eps, 0.5 * (q + m - 1.0));
  r.speed_fisher = fisher_speed(shifted(f, eps), m, 0.0);
  r.speed_drift = drift_speed(f, V);
  return r;
}

EnergyBudget energy_budget(const TrajectoryRecord& traj, const DriftSpec& V, double m, double q,
                           const DriftClassReport& cls, const BudgetOptions& opt) {
  if (!cls.member)
    throw BudgetRefused("drift is not a member of class " + class_name(cls.class_tag) + ": " +
                        cls.note);
  if (cls.critical && !(cls.norm * opt.c_interp < 1.0))
    throw BudgetRefused("critical class needs the smallness condition |V| c_interp < 1 (got " +
                        std::to_string(cls.norm * opt.c_interp) + ")");
  if (!(q >= 1.0)) throw std::invalid_argument("energy budget needs q >= 1");
  if (traj.size() < 2) throw std::invalid_argument("energy budget needs at least two snapshots");

  const double eps = traj.epsilon;
  const Grid& g = traj.grid();
  const double vol = g.measure();
  const auto times = traj.times();
  const std::size_t N = traj.size();
  std::vector<double> diss(N), fish(N), drift(N), divs(N);
  EnergyBudget b;
  b.q = q;
  for (std::size_t k = 0; k < N; ++k) {
    const DensityField& f = traj.snapshots[k];
    diss[k] = shifted_gradient_energy(f, eps, 0.5 * (q + m - 1.0));
    fish[k] = fisher_speed(shifted(f, eps), m, 0.0);
    drift[k] = drift_speed(f, V);
    divs[k] = sup_divergence(V, g, f.time());
    const DensityField s = shifted(f, eps);
    const double val = q == 1.0 ? abs_entropy(s) : shifted_power_integral(f, eps, q);
    b.sup_value = std::max(b.sup_value, val);
  }
  b.dissipation = implicit_time_integral(times, diss);
  // Fisher speed is dissipated by the implicit step too, so it takes the same rule.
  b.fisher_speed = implicit_time_integral(times, fish);
  b.drift_speed = time_integral(times, drift);
  const double A = time_integral(times, divs);
  b.divergence_integral = A;

  const DensityField& f0 = traj.snapshots.front();
  const double M = f0.mass();
  const double Me = M + eps * vol;
  const double H0 = entropy(shifted(f0, eps));
  const double Hmin = Me * std::log(Me / vol);
  if (q == 1.0) {
    b.initial_value = H0;
    b.rhs_constant = (H0 + A * M + 2.0 * vol / std::numbers::e) + 0.25 * m * (H0 + A * M - Hmin);
  } else {
    const double E0 = shifted_power_integral(f0, eps, q);
    const double c = 4.0 * m * q * (q - 1.0) / ((q + m - 1.0) * (q + m - 1.0));
    const double Es = E0 * std::exp((q - 1.0) * A);
    b.initial_value = E0;
    b.rhs_constant = Es + (E0 - std::pow(Me, q) * std::pow(vol, 1.0 - q) + (q - 1.0) * A * Es) / c;
  }
  b.lhs = b.sup_value + b.dissipation;
  b.tolerance = opt.tolerance;
  b.satisfied = b.lhs <= b.rhs_constant + opt.tolerance;

  double fisher_bound;
  if (m < 1.0)
    fisher_bound = 2.0 * (std::pow(vol, 1.0 - m) * std::pow(Me, m) -
                          shifted_power_integral(f0, eps, m)) / (1.0 - m);
  else if (m > 1.0)
    fisher_bound = 2.0 * shifted_power_integral(f0, eps, m) / (m - 1.0);
  else
    fisher_bound = 2.0 * (H0 - Hmin);
  b.speed_lhs = b.fisher_speed + b.drift_speed;
  b.speed_rhs = fisher_bound + 4.0 * b.drift_speed;
  b.speed_ratio = b.speed_rhs > 0.0 ? b.speed_lhs / b.speed_rhs : (b.speed_lhs > 0.0 ? kInf : 0.0);
  b.speed_ok = std::isfinite(b.speed_lhs) && b.speed_lhs <= 2.0 * b.speed_rhs;

  std::ostringstream dep;
  dep << "initial=" << b.initial_value << " mass=" << M << " measure=" << vol
      << " div_integral=" << A << " drift_norm=" << cls.norm << " class=" << class_name(cls.class_tag);
  b.dependence = dep.str();
  return b;
}

SobolevReport verify_parabolic_sobolev(std::span<const TimeSample> series, double p, double q) {
  if (series.size() < 2) throw std::invalid_argument("parabolic Sobolev check needs two samples");
  const Grid& g = series.front().field.grid;
  const int d = g.dim();
  if (!(p >= 1.0 && p < d)) throw std::invalid_argument("need 1 <= p < d");
  if (!(q > 0.0 && q < d * p / (d - p))) throw std::invalid_argument("need 0 < q < dp/(d-p)");
  const double s = p * (d + q) / d;
  std::vector<double> times, lhs, grad, l1;
  double supq = 0.0;
  for (const auto& smp : series) {
    if (!(smp.field.grid == g)) throw std::invalid_argument("series uses more than one grid");
    times.push_back(smp.time);
    double a = 0.0, b = 0.0, c = 0.0;
    for (double v : smp.field.values) {
      a += std::pow(std::abs(v), s);
      b += std::pow(std::abs(v), q);
      c += std::abs(v);
    }
    const double h = g.cell_volume();
    lhs.push_back(a * h);
    supq = std::max(supq, b * h);
    l1.push_back(std::pow(c * h, s));
    const FaceGradient fg = face_gradient(g, smp.field.values);
    double gp = 0.0;
    for (int j = 0; j < g.cells(1); ++j)
      for (int i = 0; i < g.cells(0); ++i) {
        const Vec2 v = fg.cell_average(i, j);
        gp += std::pow(std::hypot(v[0], v[1]), p);
      }
    grad.push_back(gp * h);
  }
  SobolevReport r;
  r.p = p;
  r.q = q;
  r.lhs = time_integral(times, lhs);
  r.gradient_term = std::pow(supq, p / d) * time_integral(times, grad);
  r.mass_term = std::pow(g.measure(), 1.0 - s) * time_integral(times, l1);
  const double excess = r.lhs - r.mass_term;
  r.holds_without_c = excess <= 1e-12 * std::max(1.0, r.lhs);
  if (r.holds_without_c) r.constant = 0.0;
  else r.constant = r.gradient_term > 0.0 ? excess / r.gradient_term : kInf;
  return r;
}

double interpolation_r1(int d, double p, double q, double m, double r2) {
  const double s = m + q - 1.0;
  const double inv_r1 = (d / p - (2.0 + d / p * (s - p)) / r2) / d;
  return inv_r1 > 0.0 ? 1.0 / inv_r1 : kInf;
}

InterpolationReport verify_interpolation(std::span<const TimeSample> series, double p, double q,
                                         double m, double r1, double r2) {
  if (series.size() < 2) throw std::invalid_argument("interpolation check needs two samples");
  const Grid& g = series.front().field.grid;
  const int d = g.dim();
  if (!(m > 0.0) || !(q >= 1.0) || !(p >= 1.0 && p <= q))
    throw std::invalid_argument("need m > 0, q >= 1 and 1 <= p <= q");
  const double s = m + q - 1.0;
  const double rel = d / r1 + (2.0 + d / p * (s - p)) / r2 - d / p;
  if (std::abs(rel) > 1e-9)
    throw std::invalid_argument("exponent relation violated, residual " + std::to_string(rel));
  const bool window = d == 2 ? (r1 >= p && std::isfinite(r1) && r2 > s)
                             : (d == 1 ? (r1 >= p && r2 >= s) : false);
  if (!window) throw std::invalid_argument("(r1, r2) outside the admissible window");

  InterpolationReport r;
  r.p = p;
  r.q = q;
  r.m = m;
  r.r1 = r1;
  r.r2 = r2;
  r.relation_residual = rel;
  r.gamma = d * p * s / (2.0 * p + d * (s - p)) * (1.0 / r1 - (d - 2.0) / (d * s));
  r.lhs = mixed_norm(series, {r1, r2});

  std::vector<double> times, grad2, l1;
  double supp = 0.0;
  for (const auto& smp : series) {
    times.push_back(smp.time);
    double a = 0.0, c = 0.0;
    for (double v : smp.field.values) {
      a += std::pow(std::abs(v), p);
      c += std::abs(v);
    }
    supp = std::max(supp, a * g.cell_volume());
    l1.push_back(c * g.cell_volume());
    grad2.push_back(face_gradient(g, power_floor(smp.field.values, 0.5 * s, 0.0)).squared_integral());
  }
  const double gradL2 = std::sqrt(time_integral(times, grad2));
  r.gradient_term = std::pow(supp, r.gamma) * std::pow(gradL2, 2.0 / r2);
  r.mass_term = std::pow(g.measure(), 1.0 / r1 - 1.0) * temporal_norm(times, l1, r2);
  const double excess = r.lhs - r.mass_term;
  if (excess <= 1e-12 * std::max(1.0, r.lhs)) r.constant = 0.0;
  else r.constant = r.gradient_term > 0.0 ? excess / r.gradient_term : kInf;
  r.homogeneity_exponent = (1.0 - p) * (1.0 - (std::isinf(r2) ? 0.0 : s / r2));
  return r;
}

VrhoReport vrho_l1_bound(const TrajectoryRecord& traj, const DriftSpec& V,
                         const MixedNormSpec& spec) {
  auto conj = [](double a) { return std::isinf(a) ? 1.0 : (a == 1.0 ? kInf : a / (a - 1.0)); };
  const Grid& g = traj.grid();
  std::vector<TimeSample> vs, rs;
  std::vector<double> times, prod;
  for (const auto& f : traj.snapshots) {
    ScalarField speed{g, std::vector<double>(g.size())};
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Vec2 v = V.evaluate(g.center(k), f.time());
      speed.values[k] = g.dim() == 2 ? std::hypot(v[0], v[1]) : std::abs(v[0]);
      s += speed.values[k] * f[k];
    }
    times.push_back(f.time());
    prod.push_back(s * g.cell_volume());
    vs.push_back({f.time(), std::move(speed)});
    rs.push_back({f.time(), f.scalar()});
  }
  VrhoReport r;
  r.lhs = time_integral(times, prod);
  r.v_norm = mixed_norm(vs, spec);
  r.rho_norm = mixed_norm(rs, {conj(spec.q1), conj(spec.q2)});
  r.rhs = r.v_norm * r.rho_norm;
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-12) + 1e-300;
  return r;
}

namespace {

double unit(const Grid& g, int axis, double x) {
  return (x - g.extent(axis).lo) / g.extent(axis).length();
}

}  // namespace

double TestFunction::value(const Grid& g, const Vec2& x, double t, double T) const {
  const double cx = std::cos(kx * std::numbers::pi * unit(g, 0, x[0]));
  const double cy = g.dim() == 2 ? std::cos(ky * std::numbers::pi * unit(g, 1, x[1])) : 1.0;
  const double tau = vanish_at_end ? std::pow(1.0 - t / T, j) : std::pow(t / T, j);
  return cx * cy * tau;
}

double TestFunction::time_derivative(const Grid& g, const Vec2& x, double t, double T) const {
  const double cx = std::cos(kx * std::numbers::pi * unit(g, 0, x[0]));
  const double cy = g.dim() == 2 ? std::cos(ky * std::numbers::pi * unit(g, 1, x[1])) : 1.0;
  double dtau = 0.0;
  if (j > 0)
    dtau = vanish_at_end ? -j * std::pow(1.0 - t / T, j - 1) / T : j * std::pow(t / T, j - 1) / T;
  return cx * cy * dtau;
}

Vec2 TestFunction::gradient(const Grid& g, const Vec2& x, double t, double T) const {
  const double pi = std::numbers::pi;
  const double ax = kx * pi / g.extent(0).length();
  const double X = kx * pi * unit(g, 0, x[0]);
  double cy = 1.0, sy = 0.0, ay = 0.0;
  if (g.dim() == 2) {
    ay = ky * pi / g.extent(1).length();
    const double Y = ky * pi * unit(g, 1, x[1]);
    cy = std::cos(Y);
    sy = std::sin(Y);
  }
  const double tau = vanish_at_end ? std::pow(1.0 - t / T, j) : std::pow(t / T, j);
  return {-ax * std::sin(X) * cy * tau, -ay * std::cos(X) * sy * tau};
}

std::vector<TestFunction> default_test_functions(int dim, bool vanish_at_end) {
  std::vector<TestFunction> out;
  const int kymax = dim == 2 ? 3 : 0;
  for (int kx = 0; kx <= 3; ++kx)
    for (int ky = 0; ky <= kymax; ++ky) {
      if (kx == 0 && ky == 0) continue;  // constants only see mass conservation
      for (int j = vanish_at_end ? 1 : 0; j <= 2; ++j) out.push_back({kx, ky, j, vanish_at_end});
    }
  return out;
}

double weak_form_defect(const TrajectoryRecord& traj, const DriftSpec& V, double m, double eps,
                        const TestFunction& phi) {
  const Grid& g = traj.grid();
  const double T = traj.horizon();
  const double h = g.cell_volume();
  const auto times = traj.times();
  std::vector<double> integrand(traj.size());
  std::vector<double> pv(g.size());
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const DensityField& f = traj.snapshots[n];
    const double t = f.time();
    for (std::size_t k = 0; k < g.size(); ++k) pv[k] = phi.value(g, g.center(k), t, T);
    const auto lap = apply_laplacian(g, pv);
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Vec2 x = g.center(k);
      const double rho = f[k];
      const double b = eps + rho;
      const double phim = m == 1.0 ? b : (b > 0.0 ? std::pow(b, m) : 0.0);
      double drift = 0.0;
      if (rho != 0.0) {
        const Vec2 v = V.evaluate(x, t);
        const Vec2 gp = phi.gradient(g, x, t, T);
        drift = rho * (v[0] * gp[0] + (g.dim() == 2 ? v[1] * gp[1] : 0.0));
      }
      s += rho * phi.time_derivative(g, x, t, T) + phim * lap[k] + drift;
    }
    integrand[n] = s * h;
  }
  auto pairing = [&](const DensityField& f) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) s += f[k] * phi.value(g, g.center(k), f.time(), T);
    return s * h;
  };
  return pairing(traj.snapshots.back()) - pairing(traj.snapshots.front()) -
         time_integral(times, integrand);
}

std::vector<double> weak_solution_residual(const TrajectoryRecord& traj, const DriftSpec& V,
                                           double m, const std::vector<TestFunction>& tests) {
  std::vector<double> out;
  out.reserve(tests.size());
  for (const auto& phi : tests) out.push_back(std::abs(weak_form_defect(traj, V, m, traj.epsilon, phi)));
  return out;
}

}  // namespace fdlab
