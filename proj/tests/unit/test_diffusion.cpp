#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "../support/dense.hpp"
#include "fdlab/diagnostics.hpp"
#include "fdlab/diffusion.hpp"

using namespace fdlab;

namespace {
const double pi = std::numbers::pi;

DensityField from_fn(const Grid& g, auto fn) {
  std::vector<double> v(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) v[k] = fn(g.center(k));
  return DensityField(g, std::move(v));
}

DiffusionParams params(double m, double eps, double dt) {
  DiffusionParams p;
  p.m = m;
  p.epsilon = eps;
  p.dt = dt;
  return p;
}

DensityField bump2d(int n) {
  const Grid g = Grid::box({0, 1}, {0, 1}, n, n);
  return from_fn(g, [](Vec2 x) {
           return 0.2 + std::exp(-((x[0] - 0.45) * (x[0] - 0.45) + (x[1] - 0.5) * (x[1] - 0.5)) / 0.02);
         }).normalized();
}

// cos(pi x) coefficient of a 1D field.
double mode1(const DensityField& f) {
  const Grid& g = f.grid();
  double a = 0.0;
  for (int i = 0; i < g.cells(0); ++i) a += f[i] * std::cos(pi * g.center(0, i)) * g.spacing(0);
  return 2.0 * a;
}
}  // namespace

TEST_SUITE("diffusion") {
  TEST_CASE("constant fields are fixed points") {
    for (double m : {0.5, 1.0, 2.0}) {
      const auto f = DensityField::constant(Grid::box({0, 1}, {0, 2}, 12, 9), 0.8);
      const auto out = step_diffusion(f, params(m, 1e-3, 0.01)).field;
      for (std::size_t k = 0; k < f.size(); ++k) CHECK(out[k] == doctest::Approx(0.8).epsilon(1e-14));
    }
  }

  TEST_CASE("linear mode matches a dense implicit heat solve") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0.1, 2.0);
    const Grid g = Grid::box({0, 1}, {0, 0.5}, 10, 6);
    std::vector<double> v(g.size());
    for (auto& x : v) x = U(rng);
    const double dt = 3e-3;
    auto A = oracle::neumann_laplacian(10, 6, g.spacing(0), g.spacing(1));
    for (std::size_t r = 0; r < A.size(); ++r) {
      for (auto& a : A[r]) a *= -dt;
      A[r][r] += 1.0;
    }
    const auto ref = oracle::dense_solve(A, v);
    const auto out = step_diffusion(DensityField(g, v), params(1.0, 0.0, dt)).field;
    for (std::size_t k = 0; k < v.size(); ++k) CHECK(std::abs(out[k] - ref[k]) <= 1e-10);
  }

  TEST_CASE("large epsilon: cosine mode decays at the linearised rate") {
    const Grid g = Grid::line({0, 1}, 128);
    const auto f = from_fn(g, [](Vec2 x) { return 1.0 + 0.01 * std::cos(pi * x[0]); });
    const double m = 0.5, eps = 10.0, dt = 1e-4;
    const auto out = step_diffusion(f, params(m, eps, dt)).field;
    const double factor = mode1(out) / mode1(f);
    // Linearisation about the mean: the diffusivity is m (eps + mean)^(m-1).
    const double rate = m * std::pow(eps + 1.0, m - 1.0) * pi * pi;
    const double measured = -std::log(factor) / dt;
    CHECK(measured == doctest::Approx(rate).epsilon(0.05));
  }

  TEST_CASE("mass, maximum principle, comparison") {
    const auto a = bump2d(24);
    std::vector<double> lower(a.data());
    for (auto& x : lower) x *= 0.7;
    const DensityField b(a.grid(), lower);
    for (double m : {0.8, 1.0, 2.0}) {
      const auto p = params(m, 1e-6, 2e-3);
      const auto sa = step_diffusion(a, p);
      const auto sb = step_diffusion(b, p);
      CHECK(std::abs(sa.field.mass() - a.mass()) <= 1e-11 * a.mass());
      CHECK(sup_abs(sa.field.values()) <= sup_abs(a.values()) + 1e-10);
      for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(sa.field[k] >= 0.0);
        CHECK(sa.field[k] >= sb.field[k] - 1e-10);
      }
      CHECK(sa.clipped_mass <= 1e-12);
    }
  }

  TEST_CASE("fast diffusion needs a positive epsilon") {
    const auto f = bump2d(8);
    CHECK_THROWS_AS(step_diffusion(f, params(0.7, 0.0, 1e-3)), std::invalid_argument);
  }

  TEST_CASE("energy identity residual: zero on constants, first order on a bump") {
    const auto c = DensityField::constant(Grid::line({0, 1}, 32), 1.0);
    const auto pc = params(0.8, 1e-6, 1e-3);
    CHECK(diffusion_energy_identity(c, step_diffusion(c, pc).field, pc, 2.0).residual <= 1e-12);

    const auto f = bump2d(32);
    double prev = kInf;
    for (double dt : {1e-4, 5e-5, 2.5e-5}) {
      const auto p = params(0.8, 1e-6, dt);
      const double r = diffusion_energy_identity(f, step_diffusion(f, p).field, p, 2.0).residual_over_dt;
      CHECK(r < prev);
      prev = r;
    }
    // q = m + 1: residual/dt stays bounded over the three step sizes.
    std::vector<double> rs;
    for (double dt : {1e-3, 5e-4, 2.5e-4}) {
      const auto p = params(0.8, 1e-6, dt);
      rs.push_back(diffusion_energy_identity(f, step_diffusion(f, p).field, p, 1.8).residual_over_dt);
    }
    for (double r : rs) CHECK(std::isfinite(r));
    CHECK(rs[2] <= rs[0]);
  }

  TEST_CASE("entropy dissipation") {
    const auto c = DensityField::constant(Grid::line({0, 1}, 32), 1.0);
    const auto pc = params(0.8, 1e-6, 1e-3);
    const auto ec = entropy_dissipation_report(c, step_diffusion(c, pc).field, pc);
    CHECK(std::abs(ec.lhs - ec.rhs) <= 1e-12);

    const auto f = bump2d(32);
    const auto p = params(0.8, 1e-6, 1e-3);
    const auto e = entropy_dissipation_report(f, step_diffusion(f, p).field, p);
    CHECK(e.holds);
    CHECK(e.slack > 0.0);

    // Linear mode: the entropy drop per step tracks the Fisher information.
    const Grid g = Grid::line({0, 1}, 256);
    const auto h = from_fn(g, [](Vec2 x) { return 1.0 + 0.5 * std::cos(pi * x[0]); });
    const auto pl = params(1.0, 0.0, 1e-5);
    const auto after = step_diffusion(h, pl).field;
    const double rate = (entropy(h) - entropy(after)) / pl.dt;
    CHECK(rate == doctest::Approx(fisher_speed(after, 1.0, 0.0)).epsilon(0.05));
  }

  TEST_CASE("porous medium step keeps compact support nonnegative") {
    const Grid g = Grid::line({0, 1}, 64);
    const auto f = from_fn(g, [](Vec2 x) { return std::abs(x[0] - 0.5) < 0.1 ? 1.0 : 0.0; });
    const auto out = step_diffusion(f, params(2.0, 0.0, 1e-3)).field;
    CHECK(std::abs(out.mass() - f.mass()) <= 1e-11);
    for (double v : out.values()) CHECK(v >= 0.0);
  }
}
