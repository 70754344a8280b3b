#include "fdlab/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace fdlab {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

void DiffusionParams::validate() const {
  if (!(m > 0.0)) throw std::invalid_argument("diffusion exponent m must be positive");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
  if (m < 1.0 && !(epsilon > 0.0))
    throw std::invalid_argument("epsilon must be positive when m < 1");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be positive");
  if (newton_max_iters < 1) throw std::invalid_argument("newton_max_iters must be >= 1");
}

namespace {

SpMat laplacian(const Grid& g) {
  if (g.boundary() == Boundary::periodic)
    throw std::invalid_argument("the diffusion step supports no-flux grids only");
  const int nx = g.cells(0), ny = g.cells(1);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(g.size() * 5);
  auto face = [&](std::size_t a, std::size_t b, double c) {
    t.emplace_back(int(a), int(a), -c);
    t.emplace_back(int(b), int(b), -c);
    t.emplace_back(int(a), int(b), c);
    t.emplace_back(int(b), int(a), c);
  };
  const double cx = 1.0 / (g.spacing(0) * g.spacing(0));
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) face(g.index(i - 1, j), g.index(i, j), cx);
  if (g.dim() == 2) {
    const double cy = 1.0 / (g.spacing(1) * g.spacing(1));
    for (int j = 1; j < ny; ++j)
      for (int i = 0; i < nx; ++i) face(g.index(i, j - 1), g.index(i, j), cy);
  }
  SpMat L(int(g.size()), int(g.size()));
  L.setFromTriplets(t.begin(), t.end());
  L.makeCompressed();
  return L;
}

double phi(double u, const DiffusionParams& p) {
  const double b = p.epsilon + u;
  if (p.m == 1.0) return b;
  return b > 0.0 ? std::pow(b, p.m) : 0.0;
}

double dphi(double u, const DiffusionParams& p) {
  const double b = p.epsilon + u;
  if (p.m == 1.0) return 1.0;
  if (b > 0.0) return p.m * std::pow(b, p.m - 1.0);
  return p.m > 1.0 ? 0.0 : p.m * std::pow(0.5 * p.epsilon, p.m - 1.0);
}

}  // namespace

struct DiffusionStepper::Impl {
  SpMat L;
  double row_scale = 0.0;  // max_i sum_j |L_ij|
  mutable Eigen::SparseLU<SpMat> lu;
  mutable bool analyzed = false;

  // M = I - dt L diag(d)
  SpMat system(const Vec& d, double dt) const {
    SpMat M = L;
    for (int j = 0; j < M.outerSize(); ++j)
      for (SpMat::InnerIterator it(M, j); it; ++it) it.valueRef() *= -dt * d[j];
    for (int j = 0; j < M.outerSize(); ++j) M.coeffRef(j, j) += 1.0;
    return M;
  }

  bool solve(const SpMat& M, const Vec& rhs, Vec& x) const {
    if (!analyzed) {
      lu.analyzePattern(M);
      analyzed = true;
    }
    lu.factorize(M);
    if (lu.info() != Eigen::Success) return false;
    x = lu.solve(rhs);
    return lu.info() == Eigen::Success && x.allFinite();
  }
};

DiffusionStepper::DiffusionStepper(const Grid& grid) : grid_(grid), impl_(std::make_unique<Impl>()) {
  impl_->L = laplacian(grid);
  Vec rs = Vec::Zero(impl_->L.rows());
  for (int j = 0; j < impl_->L.outerSize(); ++j)
    for (SpMat::InnerIterator it(impl_->L, j); it; ++it) rs[it.row()] += std::abs(it.value());
  impl_->row_scale = rs.maxCoeff();
}

DiffusionStepper::~DiffusionStepper() = default;
DiffusionStepper::DiffusionStepper(DiffusionStepper&&) noexcept = default;
DiffusionStepper& DiffusionStepper::operator=(DiffusionStepper&&) noexcept = default;

DiffusionStep DiffusionStepper::step(const DensityField& before, const DiffusionParams& p) const {
  p.validate();
  if (!(before.grid() == grid_)) throw std::invalid_argument("field grid differs from the stepper grid");
  const int n = int(before.size());
  const Vec u0 = Eigen::Map<const Vec>(before.data().data(), n);
  const double sup0 = u0.maxCoeff();
  Vec u = u0;

  auto residual = [&](const Vec& w, Vec& F) {
    Vec ph(n);
    for (int i = 0; i < n; ++i) ph[i] = phi(w[i], p);
    F = w - u0 - p.dt * (impl_->L * ph);
    return F.lpNorm<Eigen::Infinity>();
  };

  // Tolerance relative to the data scale, never below what round-off allows.
  const double phi_scale = phi(std::max(sup0, 0.0), p);
  const double tol = std::max(p.newton_tol * std::max(1.0, sup0),
                              1e-14 * (std::max(1.0, sup0) + p.dt * impl_->row_scale * phi_scale));

  DiffusionStep out;
  Vec F;
  double res = residual(u, F);
  int it = 0;
  for (; it < p.newton_max_iters && res > tol; ++it) {
    Vec d(n);
    for (int i = 0; i < n; ++i) d[i] = dphi(u[i], p);
    Vec delta;
    if (!impl_->solve(impl_->system(d, p.dt), -F, delta)) break;
    double lam = 1.0;
    if (p.m < 1.0) {
      // Keep eps + u above eps/2 so the Jacobian stays bounded.
      for (int i = 0; i < n; ++i)
        if (delta[i] < 0.0) {
          const double room = u[i] + 0.5 * p.epsilon;
          if (room + lam * delta[i] < 0.0) lam = std::max(0.0, -room / delta[i]);
        }
    }
    bool accepted = false;
    Vec Ft;
    for (int ls = 0; ls < 30 && lam > 1e-9; ++ls, lam *= 0.5) {
      const Vec ut = u + lam * delta;
      const double rt = residual(ut, Ft);
      if (rt <= (1.0 - 1e-4 * lam) * res || rt <= tol) {
        u = ut;
        F = Ft;
        res = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  out.newton_iterations = it;

  if (res > tol) {
    // Lagged-diffusivity fixed point: L phi(u) = L (a u) with a the secant
    // slope of phi through 0; every iterate solves an M-matrix system.
    const int cap = 5 * p.newton_max_iters;
    const double phi0 = phi(0.0, p);
    int k = 0;
    for (; k < cap && res > tol; ++k) {
      Vec a(n);
      for (int i = 0; i < n; ++i)
        a[i] = std::abs(u[i]) > 1e-14 ? (phi(u[i], p) - phi0) / u[i] : dphi(0.0, p);
      Vec next;
      if (!impl_->solve(impl_->system(a, p.dt), u0, next)) break;
      u = next;
      res = residual(u, F);
    }
    out.picard_iterations = k;
  }
  out.residual = res;
  if (!(res <= tol))
    throw DiffusionFailure("diffusion step did not converge (residual " + std::to_string(res) + ")",
                           res);

  std::vector<double> vals(u.data(), u.data() + n);
  double clipped = 0.0;
  for (double& v : vals)
    if (v < 0.0) {
      clipped -= v;
      v = 0.0;
    }
  out.clipped_mass = clipped * grid_.cell_volume();
  out.field = DensityField(grid_, std::move(vals), before.time() + p.dt);
  return out;
}

DiffusionStep step_diffusion(const DensityField& before, const DiffusionParams& p) {
  return DiffusionStepper(before.grid()).step(before, p);
}

std::vector<double> apply_laplacian(const Grid& grid, std::span<const double> v) {
  const SpMat L = laplacian(grid);
  const Vec x = Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size()));
  const Vec y = L * x;
  return {y.data(), y.data() + y.size()};
}

namespace {

double shifted_power_integral(const DensityField& f, double eps, double q) {
  double s = 0.0;
  for (double v : f.values()) s += std::pow(eps + v, q);
  return s * f.grid().cell_volume();
}

double shifted_entropy(const DensityField& f, double eps) {
  double s = 0.0;
  for (double v : f.values()) {
    const double b = eps + v;
    if (b > 0.0) s += b * std::log(b);
  }
  return s * f.grid().cell_volume();
}

double shifted_gradient_energy(const DensityField& f, double eps, double a) {
  const auto p = power_floor(f.values(), a, 0.0, eps);
  return face_gradient(f.grid(), p).squared_integral();
}

}  // namespace

IdentityResidual diffusion_energy_identity(const DensityField& before, const DensityField& after,
                                           const DiffusionParams& p, double q) {
  if (!(q > 1.0)) throw std::invalid_argument("energy identity needs q > 1");
  const double m = p.m, eps = p.epsilon;
  const double c = 4.0 * m * q * (q - 1.0) / ((m + q - 1.0) * (m + q - 1.0));
  IdentityResidual r;
  r.lhs = shifted_power_integral(after, eps, q) +
          c * p.dt * shifted_gradient_energy(after, eps, 0.5 * (q + m - 1.0));
  r.rhs = shifted_power_integral(before, eps, q);
  r.residual = std::abs(r.lhs - r.rhs);
  r.residual_over_dt = r.residual / p.dt;
  return r;
}

EntropyDissipation entropy_dissipation_report(const DensityField& before,
                                              const DensityField& after,
                                              const DiffusionParams& p) {
  EntropyDissipation r;
  r.lhs = shifted_entropy(after, p.epsilon) +
          p.dt * (4.0 / p.m) * shifted_gradient_energy(after, p.epsilon, 0.5 * p.m);
  r.rhs = shifted_entropy(before, p.epsilon);
  r.tol = 1e-8 + 10.0 * p.dt * p.dt;
  r.slack = r.rhs + r.tol - r.lhs;
  r.holds = r.slack >= 0.0;
  return r;
}

}  // namespace fdlab
