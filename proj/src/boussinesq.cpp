#include "fdlab/boussinesq.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "fdlab/diagnostics.hpp"
#include "fdlab/drift.hpp"
#include "fdlab/transport.hpp"

namespace fdlab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

int wrap(int i, int n) { return ((i % n) + n) % n; }

// Face lattice of one velocity component. `axis` is the component's own
// direction: the lattice has cells(axis)+1 faces along it.
struct Lattice {
  int axis = 0;
  int nx = 0, ny = 0;  // cell counts
  bool periodic = false;
  int fx() const { return axis == 0 ? nx + 1 : nx; }
  int fy() const { return axis == 1 ? ny + 1 : ny; }
  std::size_t size() const { return std::size_t(fx()) * fy(); }
  std::size_t at(int i, int j) const { return std::size_t(j) * fx() + i; }
  // Unknown index of face (i, j) or -1 for a fixed wall face.
  int unknown(int i, int j) const {
    const int n_along = axis == 0 ? nx : ny;
    int a = axis == 0 ? i : j;
    int b = axis == 0 ? j : i;
    if (periodic) {
      a = wrap(a, n_along);
      b = wrap(b, axis == 0 ? ny : nx);
      return axis == 0 ? b * n_along + a : a * nx + b;
    }
    if (a <= 0 || a >= n_along) return -1;
    return axis == 0 ? b * (n_along - 1) + (a - 1) : (a - 1) * nx + b;
  }
  int unknowns() const {
    const int n_along = axis == 0 ? nx : ny;
    const int n_across = axis == 0 ? ny : nx;
    return (periodic ? n_along : n_along - 1) * n_across;
  }
};

// Value of a component at lattice point (i, j) with periodic wrap, zero on
// walls normal to the component, and the no-slip mirror (-own) across walls
// parallel to it.
double face_value(const Lattice& L, const std::vector<double>& f, int i, int j, double own) {
  if (L.periodic) {
    return f[L.at(wrap(i, L.nx), wrap(j, L.ny))];
  }
  if (i < 0 || i >= L.fx() || j < 0 || j >= L.fy()) return -own;
  return f[L.at(i, j)];
}

// Discrete vector Laplacian on the unknowns of one component.
SpMat velocity_laplacian(const Lattice& L, double hx, double hy) {
  std::vector<Eigen::Triplet<double>> t;
  const int N = L.unknowns();
  for (int j = 0; j < L.fy(); ++j)
    for (int i = 0; i < L.fx(); ++i) {
      const int r = L.unknown(i, j);
      if (r < 0) continue;
      if (L.periodic && ((L.axis == 0 && i == L.nx) || (L.axis == 1 && j == L.ny))) continue;
      double diag = 0.0;
      const int di[4] = {-1, 1, 0, 0}, dj[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const double w = k < 2 ? 1.0 / (hx * hx) : 1.0 / (hy * hy);
        diag -= w;
        const int ni = i + di[k], nj = j + dj[k];
        const bool across_wall = !L.periodic && (ni < 0 || ni >= L.fx() || nj < 0 || nj >= L.fy());
        if (across_wall) {
          diag -= w;  // mirror ghost
          continue;
        }
        const int c = L.unknown(ni, nj);
        if (c >= 0) t.emplace_back(r, c, w);
      }
      t.emplace_back(r, r, diag);
    }
  SpMat A(N, N);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

// Negative cell Laplacian with cell 0 pinned (identity row and column).
SpMat pressure_matrix(const Grid& g) {
  const int nx = g.cells(0), ny = g.cells(1);
  const double hx = g.spacing(0), hy = g.spacing(1);
  const bool per = g.boundary() == Boundary::periodic;
  std::vector<Eigen::Triplet<double>> t;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int r = j * nx + i;
      if (r == 0) {
        t.emplace_back(0, 0, 1.0);
        continue;
      }
      double diag = 0.0;
      const int di[4] = {-1, 1, 0, 0}, dj[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        int ni = i + di[k], nj = j + dj[k];
        if (per) {
          ni = wrap(ni, nx);
          nj = wrap(nj, ny);
        } else if (ni < 0 || ni >= nx || nj < 0 || nj >= ny) {
          continue;
        }
        const double w = k < 2 ? 1.0 / (hx * hx) : 1.0 / (hy * hy);
        diag += w;
        const int c = nj * nx + ni;
        if (c != 0) t.emplace_back(r, c, -w);
      }
      t.emplace_back(r, r, diag);
    }
  SpMat A(nx * ny, nx * ny);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

std::vector<double> divergence(const Grid& g, const std::vector<double>& u,
                               const std::vector<double>& v) {
  const int nx = g.cells(0), ny = g.cells(1);
  const double hx = g.spacing(0), hy = g.spacing(1);
  std::vector<double> d(g.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      d[g.index(i, j)] = (u[std::size_t(j) * (nx + 1) + i + 1] - u[std::size_t(j) * (nx + 1) + i]) / hx +
                         (v[std::size_t(j + 1) * nx + i] - v[std::size_t(j) * nx + i]) / hy;
  return d;
}

double kinetic_sum(const BoussinesqState& s) {
  const Grid& g = s.grid();
  const int nx = g.cells(0), ny = g.cells(1);
  double e = 0.0;
  const int ux = s.periodic() ? nx : nx + 1, vy = s.periodic() ? ny : ny + 1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < ux; ++i) e += s.u[std::size_t(j) * (nx + 1) + i] * s.u[std::size_t(j) * (nx + 1) + i];
  for (int j = 0; j < vy; ++j)
    for (int i = 0; i < nx; ++i) e += s.v[std::size_t(j) * nx + i] * s.v[std::size_t(j) * nx + i];
  return e * g.cell_volume();
}

}  // namespace

BoussinesqState BoussinesqState::at_rest(const DensityField& theta) {
  const Grid& g = theta.grid();
  if (g.dim() != 2) throw std::invalid_argument("the convection model is two-dimensional");
  BoussinesqState s;
  s.theta = theta;
  s.u.assign(std::size_t(g.cells(0) + 1) * g.cells(1), 0.0);
  s.v.assign(std::size_t(g.cells(0)) * (g.cells(1) + 1), 0.0);
  s.pressure.assign(g.size(), 0.0);
  s.time = theta.time();
  return s;
}

double BoussinesqState::max_speed() const {
  return std::max(sup_abs(u), sup_abs(v));
}

double BoussinesqState::max_divergence() const { return sup_abs(divergence(grid(), u, v)); }

double BoussinesqState::velocity_l2() const { return std::sqrt(kinetic_sum(*this)); }

struct BoussinesqSolver::Impl {
  Lattice lu, lv;
  SpMat lap_u, lap_v;
  Eigen::SimplicialLDLT<SpMat> visc_u, visc_v, pressure;
  std::unique_ptr<DiffusionStepper> diffusion;
};

BoussinesqSolver::BoussinesqSolver(const Grid& grid, double dt)
    : grid_(grid), dt_(dt), impl_(std::make_unique<Impl>()) {
  if (grid.dim() != 2) throw std::invalid_argument("the convection model is two-dimensional");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const bool per = grid.boundary() == Boundary::periodic;
  const int nx = grid.cells(0), ny = grid.cells(1);
  impl_->lu = Lattice{0, nx, ny, per};
  impl_->lv = Lattice{1, nx, ny, per};
  const double hx = grid.spacing(0), hy = grid.spacing(1);
  impl_->lap_u = velocity_laplacian(impl_->lu, hx, hy);
  impl_->lap_v = velocity_laplacian(impl_->lv, hx, hy);
  auto implicit = [&](const SpMat& L) {
    SpMat I(L.rows(), L.cols());
    I.setIdentity();
    return SpMat(I - dt * L);
  };
  impl_->visc_u.compute(implicit(impl_->lap_u));
  impl_->visc_v.compute(implicit(impl_->lap_v));
  impl_->pressure.compute(pressure_matrix(grid));
  if (impl_->visc_u.info() != Eigen::Success || impl_->visc_v.info() != Eigen::Success ||
      impl_->pressure.info() != Eigen::Success)
    throw std::runtime_error("factorisation of the velocity or pressure operator failed");
  if (!per) {
    Grid walls = Grid::box(grid.extent(0), grid.extent(1), nx, ny, Boundary::neumann);
    impl_->diffusion = std::make_unique<DiffusionStepper>(walls);
  }
}

BoussinesqSolver::~BoussinesqSolver() = default;
BoussinesqSolver::BoussinesqSolver(BoussinesqSolver&&) noexcept = default;

double BoussinesqSolver::velocity_dissipation(const BoussinesqState& s) const {
  double total = 0.0;
  for (int c = 0; c < 2; ++c) {
    const Lattice& L = c == 0 ? impl_->lu : impl_->lv;
    const std::vector<double>& f = c == 0 ? s.u : s.v;
    Vec x(L.unknowns());
    for (int j = 0; j < L.fy(); ++j)
      for (int i = 0; i < L.fx(); ++i) {
        const int r = L.unknown(i, j);
        if (r >= 0) x[r] = f[L.at(i, j)];
      }
    const SpMat& A = c == 0 ? impl_->lap_u : impl_->lap_v;
    total -= x.dot(A * x);
  }
  return total * grid_.cell_volume();
}

BoussinesqState BoussinesqSolver::step(const BoussinesqState& s, double m, double eps,
                                       BoussinesqStepStats* stats) const {
  const Grid& g = s.grid();
  if (g.cells(0) != grid_.cells(0) || g.cells(1) != grid_.cells(1))
    throw std::invalid_argument("state grid does not match the solver grid");
  const int nx = g.cells(0), ny = g.cells(1);
  const double hx = g.spacing(0), hy = g.spacing(1);
  const double dt = dt_;
  const double cfl = dt * s.max_speed() / g.min_spacing();
  if (cfl > 0.5) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "CFL number %.4g exceeds 0.5", cfl);
    throw CflViolation(buf);
  }
  BoussinesqStepStats st;
  st.cfl = cfl;
  BoussinesqState out = s;
  out.time = s.time + dt;

  // theta: implicit diffusion, then transport along the current velocity.
  const double theta_mass = s.theta.mass();
  if (sup_abs(s.theta.values()) > 0.0) {
    if (s.periodic()) throw std::invalid_argument("periodic mode supports theta = 0 only");
    DiffusionParams dp;
    dp.m = m;
    dp.epsilon = eps;
    dp.dt = dt;
    const DensityField diffused = impl_->diffusion->step(s.theta, dp).field;
    auto field = std::make_shared<StaggeredVelocity>();
    field->grid = impl_->diffusion->grid();
    field->u = s.u;
    field->v = s.v;
    // Gate on the cell-centred field: central divergence of face averages.
    double gate = 0.0;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        auto uc = [&](int a) {
          a = std::clamp(a, 0, nx - 1);
          return 0.5 * (s.u[std::size_t(j) * (nx + 1) + a] + s.u[std::size_t(j) * (nx + 1) + a + 1]);
        };
        auto vc = [&](int b) {
          b = std::clamp(b, 0, ny - 1);
          return 0.5 * (s.v[std::size_t(b) * nx + i] + s.v[std::size_t(b + 1) * nx + i]);
        };
        const int il = std::max(i - 1, 0), ir = std::min(i + 1, nx - 1);
        const int jl = std::max(j - 1, 0), jr = std::min(j + 1, ny - 1);
        const double d = (uc(ir) - uc(il)) / ((ir - il) * hx) + (vc(jr) - vc(jl)) / ((jr - jl) * hy);
        gate = std::max(gate, std::abs(d));
      }
    st.drift_divergence_free = gate <= 1e-8 * std::max(s.velocity_l2(), 1e-300);
    DriftSpec V = DriftSpec::staggered(field);
    V.declare(st.drift_divergence_free, true);
    TransportOptions to;
    to.n_rk = 4;
    to.renormalize = true;
    to.on_exit = ExitPolicy::zero_inflow;
    DensityField moved = pushforward(diffused, V, s.time, out.time, to).field;
    out.theta = DensityField(g, moved.data(), out.time);
    st.theta_transported = true;
  } else {
    out.theta.set_time(out.time);
  }
  st.theta_mass_change = theta_mass > 0.0 ? (out.theta.mass() - theta_mass) / theta_mass : 0.0;

  // Velocity: explicit advection, implicit viscosity.
  const Lattice& lu = impl_->lu;
  const Lattice& lv = impl_->lv;
  auto U = [&](int i, int j, double own) { return face_value(lu, s.u, i, j, own); };
  auto Vv = [&](int i, int j, double own) { return face_value(lv, s.v, i, j, own); };
  Vec ru(lu.unknowns()), rv(lv.unknowns());
  for (int j = 0; j < lu.fy(); ++j)
    for (int i = 0; i < lu.fx(); ++i) {
      const int r = lu.unknown(i, j);
      if (r < 0 || (lu.periodic && i == nx)) continue;
      const double uo = s.u[lu.at(i, j)];
      const double dudx = (U(i + 1, j, uo) - U(i - 1, j, uo)) / (2 * hx);
      const double dudy = (U(i, j + 1, uo) - U(i, j - 1, uo)) / (2 * hy);
      const double vb = 0.25 * (Vv(i - 1, j, 0) + Vv(i, j, 0) + Vv(i - 1, j + 1, 0) + Vv(i, j + 1, 0));
      ru[r] = uo - dt * (uo * dudx + vb * dudy);
    }
  for (int j = 0; j < lv.fy(); ++j)
    for (int i = 0; i < lv.fx(); ++i) {
      const int r = lv.unknown(i, j);
      if (r < 0 || (lv.periodic && j == ny)) continue;
      const double vo = s.v[lv.at(i, j)];
      const double dvdx = (Vv(i + 1, j, vo) - Vv(i - 1, j, vo)) / (2 * hx);
      const double dvdy = (Vv(i, j + 1, vo) - Vv(i, j - 1, vo)) / (2 * hy);
      const double ub = 0.25 * (U(i, j - 1, 0) + U(i + 1, j - 1, 0) + U(i, j, 0) + U(i + 1, j, 0));
      rv[r] = vo - dt * (ub * dvdx + vo * dvdy);
    }
  const Vec su = impl_->visc_u.solve(ru);
  const Vec sv = impl_->visc_v.solve(rv);
  std::vector<double> us(s.u.size(), 0.0), vs(s.v.size(), 0.0);
  for (int j = 0; j < lu.fy(); ++j)
    for (int i = 0; i < lu.fx(); ++i)
      if (const int r = lu.unknown(i, j); r >= 0) us[lu.at(i, j)] = su[r];
  for (int j = 0; j < lv.fy(); ++j)
    for (int i = 0; i < lv.fx(); ++i)
      if (const int r = lv.unknown(i, j); r >= 0) vs[lv.at(i, j)] = sv[r];

  // Buoyancy -theta e_y on the y-faces, then the projection removes its
  // gradient part together with the divergence of the intermediate field.
  const std::vector<double>& th = s.theta.data();
  for (int j = 0; j < lv.fy(); ++j)
    for (int i = 0; i < nx; ++i) {
      if (lv.unknown(i, j) < 0) continue;
      const int jb = s.periodic() ? wrap(j - 1, ny) : j - 1;
      const int ja = s.periodic() ? wrap(j, ny) : j;
      vs[lv.at(i, j)] -= dt * 0.5 * (th[g.index(i, jb)] + th[g.index(i, ja)]);
    }

  const std::vector<double> div = divergence(g, us, vs);
  Vec rhs(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) rhs[k] = -div[k] / dt;  // -L phi = -div / dt
  rhs[0] = 0.0;
  const Vec phi = impl_->pressure.solve(rhs);
  if (impl_->pressure.info() != Eigen::Success) throw std::runtime_error("pressure solve failed");
  auto P = [&](int i, int j) { return phi[std::size_t(wrap(j, ny)) * nx + wrap(i, nx)]; };
  for (int j = 0; j < lu.fy(); ++j)
    for (int i = 0; i < lu.fx(); ++i)
      if (lu.unknown(i, j) >= 0) us[lu.at(i, j)] -= dt * (P(i, j) - P(i - 1, j)) / hx;
  for (int j = 0; j < lv.fy(); ++j)
    for (int i = 0; i < lv.fx(); ++i)
      if (lv.unknown(i, j) >= 0) vs[lv.at(i, j)] -= dt * (P(i, j) - P(i, j - 1)) / hy;
  out.u = std::move(us);
  out.v = std::move(vs);
  out.pressure.assign(phi.data(), phi.data() + phi.size());
  st.divergence_after = out.max_divergence();
  if (stats) *stats = st;
  return out;
}

BoussinesqState step_boussinesq(const BoussinesqState& s, double m, double eps, double dt) {
  return BoussinesqSolver(s.grid(), dt).step(s, m, eps);
}

BoussinesqEnergyReport boussinesq_energy_check(const std::vector<BoussinesqState>& states,
                                               const BoussinesqSolver& solver, double m,
                                               double eps) {
  BoussinesqEnergyReport r;
  if (states.empty()) return r;
  const BoussinesqState& s0 = states.front();
  const Grid& g = s0.grid();
  const double area = g.measure();
  auto shifted = [&](const DensityField& f) {
    std::vector<double> v(f.data());
    for (double& x : v) x += eps;
    return DensityField(f.grid(), std::move(v), f.time());
  };
  double sup_part = 0.0, accumulated = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const BoussinesqState& s = states[k];
    BoussinesqSample q;
    q.time = s.time;
    q.theta_mass = s.theta.mass();
    q.kinetic = kinetic_sum(s);
    q.theta_dissipation = grad_power(shifted(s.theta), 0.5 * m).squared_integral();
    q.velocity_dissipation = solver.velocity_dissipation(s);
    // Implicit steps dissipate at the new time level: right-endpoint rule.
    if (k > 0)
      accumulated += (s.time - states[k - 1].time) * (q.theta_dissipation + q.velocity_dissipation);
    sup_part = std::max(sup_part, q.theta_mass + q.kinetic);
    q.lhs = sup_part + accumulated;
    if (k > 0 && states[k - 1].theta.mass() > 0.0)
      r.max_mass_drift = std::max(
          r.max_mass_drift, std::abs(q.theta_mass - states[k - 1].theta.mass()) / states[k - 1].theta.mass());
    r.lhs_max = std::max(r.lhs_max, q.lhs);
    r.samples.push_back(q);
  }

  const double M = s0.theta.mass();
  const double Me = M + eps * area;
  const double H0 = entropy(shifted(s0.theta));
  const double Hmin = Me > 0.0 ? Me * std::log(Me / area) : 0.0;
  const int nx = g.cells(0), ny = g.cells(1);
  double moment = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) moment += s0.theta[g.index(i, j)] * g.center(1, j);
  moment *= g.cell_volume();
  const double T = states.back().time - s0.time;
  const double top = std::pow(eps + sup_abs(s0.theta.values()), m);
  const double Bu = r.samples.front().kinetic + 2.0 * (moment - M * g.extent(1).lo) +
                    (M > 0.0 ? 2.0 * T * g.extent(0).length() * top : 0.0);
  r.scale = M + Bu + 0.25 * m * (H0 - Hmin);
  r.ratio = r.scale > 0.0 ? r.lhs_max / r.scale : (r.lhs_max > 0.0 ? kInf : 0.0);
  r.bounded = r.lhs_max <= 2.0 * r.scale;

  double vel_diss = 0.0;
  for (std::size_t k = 1; k < states.size(); ++k)
    vel_diss += (states[k].time - states[k - 1].time) * r.samples[k].velocity_dissipation;
  const double k0 = r.samples.front().kinetic;
  r.kinetic_balance = k0 > 0.0 ? (r.samples.back().kinetic + 2.0 * vel_diss - k0) / k0 : 0.0;
  return r;
}

BoussinesqRun run_boussinesq(const BoussinesqState& init, double m, double eps, double T,
                             double dt) {
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  const long steps = std::lround(T / dt);
  if (steps < 1 || std::abs(steps * dt - T) > 1e-9 * T)
    throw std::invalid_argument("dt must divide T");
  BoussinesqSolver solver(init.grid(), dt);
  BoussinesqRun run;
  run.states.reserve(steps + 1);
  run.states.push_back(init);
  for (long k = 0; k < steps; ++k) {
    BoussinesqStepStats st;
    run.states.push_back(solver.step(run.states.back(), m, eps, &st));
    run.states.back().time = init.time + (k + 1) * dt;
    run.max_cfl = std::max(run.max_cfl, st.cfl);
    run.max_divergence = std::max(run.max_divergence, st.divergence_after);
  }
  run.energy = boussinesq_energy_check(run.states, solver, m, eps);
  return run;
}

BoussinesqState taylor_green(const Grid& grid, double amplitude) {
  if (grid.boundary() != Boundary::periodic)
    throw std::invalid_argument("the vortex array needs a periodic grid");
  BoussinesqState s = BoussinesqState::at_rest(DensityField::constant(grid, 0.0));
  const int nx = grid.cells(0), ny = grid.cells(1);
  const double hx = grid.spacing(0), hy = grid.spacing(1);
  const double kx = 2.0 * std::numbers::pi / grid.extent(0).length();
  const double ky = 2.0 * std::numbers::pi / grid.extent(1).length();
  // Amplitude ratio chosen so the MAC divergence vanishes exactly.
  const double ratio = (std::sin(0.5 * kx * hx) / hx) / (std::sin(0.5 * ky * hy) / hy);
  const double x0 = grid.extent(0).lo, y0 = grid.extent(1).lo;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double x = x0 + i * hx, y = grid.center(1, j);
      s.u[std::size_t(j) * (nx + 1) + i] = amplitude * std::sin(kx * (x - x0)) * std::cos(ky * (y - y0));
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double x = grid.center(0, i), y = y0 + j * hy;
      s.v[std::size_t(j) * nx + i] =
          -amplitude * ratio * std::cos(kx * (x - x0)) * std::sin(ky * (y - y0));
    }
  return s;
}

double taylor_green_decay_rate(const Grid& grid) {
  const double kx = 2.0 * std::numbers::pi / grid.extent(0).length();
  const double ky = 2.0 * std::numbers::pi / grid.extent(1).length();
  return 2.0 * (kx * kx + ky * ky);
}

void write_boussinesq(const fs::path& dir, const BoussinesqRun& run, double m, double eps,
                      int stride, const json& extra) {
  if (run.states.empty()) throw std::invalid_argument("empty run");
  stride = std::max(stride, 1);
  fs::create_directories(dir);
  const Grid& g = run.states.front().grid();
  json man;
  man["format"] = "fdlab-boussinesq";
  man["version"] = 1;
  man["grid"] = grid_to_json(g);
  man["m"] = m;
  man["epsilon"] = eps;
  json snaps = json::array();
  for (std::size_t k = 0; k < run.states.size(); ++k) {
    if (k % stride != 0 && k + 1 != run.states.size()) continue;
    const BoussinesqState& s = run.states[k];
    char stem[32];
    std::snprintf(stem, sizeof stem, "snapshot_%05zu", k);
    write_snapshot(dir, stem, s.theta);
    json vel{{"time", s.time}, {"u", s.u}, {"v", s.v}};
    write_atomic(dir / (std::string(stem) + "_velocity.json"), vel.dump() + "\n");
    snaps.push_back({{"time", s.time},
                     {"manifest", std::string(stem) + ".json"},
                     {"velocity", std::string(stem) + "_velocity.json"}});
  }
  man["snapshots"] = snaps;
  const BoussinesqEnergyReport& e = run.energy;
  man["energy"] = {{"lhs_max", e.lhs_max},         {"scale", e.scale},
                   {"ratio", e.ratio},             {"bounded", e.bounded},
                   {"max_mass_drift", e.max_mass_drift}, {"kinetic_balance", e.kinetic_balance},
                   {"max_cfl", run.max_cfl},       {"max_divergence", run.max_divergence}};
  for (auto it = extra.begin(); it != extra.end(); ++it) man[it.key()] = it.value();
  std::string csv = "time,theta_mass,kinetic,theta_dissipation,velocity_dissipation,lhs\n";
  for (const auto& q : e.samples)
    csv += fmt(q.time) + "," + fmt(q.theta_mass) + "," + fmt(q.kinetic) + "," +
           fmt(q.theta_dissipation) + "," + fmt(q.velocity_dissipation) + "," + fmt(q.lhs) + "\n";
  write_atomic(dir / "energy.csv", csv);
  write_atomic(dir / "manifest.json", man.dump(2) + "\n");
}

}  // namespace fdlab
