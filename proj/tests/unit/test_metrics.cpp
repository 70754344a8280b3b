#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "measures.hpp"
#include "fdlab/metrics.hpp"
#include "fdlab/splitting.hpp"

using namespace fdlab;

namespace {
using oracle::lp_w2;
using oracle::random_measure;
const Interval I{0, 1};

DensityField from_fn(const Grid& g, auto fn) {
  std::vector<double> v(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) v[k] = fn(g.center(k));
  return DensityField(g, std::move(v));
}

DensityField bump(const Grid& g, Vec2 c, double w = 0.1) {
  return from_fn(g, [&](Vec2 x) {
           double r2 = (x[0] - c[0]) * (x[0] - c[0]);
           if (g.dim() == 2) r2 += (x[1] - c[1]) * (x[1] - c[1]);
           return r2 < w * w ? std::pow(1.0 - r2 / (w * w), 3) : 0.0;
         }).normalized();
}

SplittingSchedule schedule(double T, int n, double dt, double m, double eps) {
  SplittingSchedule s;
  s.T = T;
  s.n = n;
  s.diffusion.dt = dt;
  s.diffusion.m = m;
  s.diffusion.epsilon = eps;
  return s;
}
}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("w2_1d: translation, identity, symmetry") {
    const Grid g = Grid::line({0, 1.5}, 150);
    const auto a = from_fn(g, [](Vec2 x) { return x[0] < 1.0 ? 1.0 : 0.0; }).normalized();
    const auto b = from_fn(g, [](Vec2 x) { return x[0] >= 0.5 ? 1.0 : 0.0; }).normalized();
    CHECK(w2_1d_density(a, b) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(w2_1d_density(a, a) == 0.0);

    std::mt19937_64 rng(4);
    for (int k = 0; k < 20; ++k) {
      const auto mu = random_measure(rng, 20, 1), nu = random_measure(rng, 25, 1);
      CHECK(std::abs(w2_1d(mu, nu) - w2_1d(nu, mu)) <= 1e-10);
      CHECK(w2_1d(mu, mu) <= 1e-10);
      DiscreteMeasure sh = mu;
      for (auto& x : sh.support) x[0] += 0.37;
      CHECK(std::abs(w2_1d(mu, sh) - 0.37) <= 1e-12);
    }
  }

  TEST_CASE("w2_1d and network simplex agree with a dense LP") {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 10; ++k) {
      const auto mu = random_measure(rng, 32, 1), nu = random_measure(rng, 32, 1);
      const double lp = lp_w2(mu, nu);
      CHECK(std::abs(w2_1d(mu, nu) - lp) <= 1e-8);
      CHECK(std::abs(wp_exact(mu, nu, 2.0).value - lp) <= 1e-8);
    }
    for (int k = 0; k < 5; ++k) {
      const auto mu = random_measure(rng, 16, 2), nu = random_measure(rng, 16, 2);
      const auto ex = wp_exact(mu, nu, 2.0);
      CHECK(std::abs(ex.value - lp_w2(mu, nu)) <= 1e-8);
      CHECK(ex.plan.marginal_error(mu, nu) <= 1e-9);
    }
  }

  TEST_CASE("wp_exact: identity, single atoms, triangle inequality") {
    std::mt19937_64 rng(23);
    const auto mu = random_measure(rng, 12, 2);
    const auto self = wp_exact(mu, mu, 2.0);
    CHECK(self.value <= 1e-10);
    for (const auto& e : self.plan.entries) CHECK((e.i == e.j || e.mass <= 1e-14));

    DiscreteMeasure a{2, {{0.1, 0.2}}, {1.0}}, b{2, {{0.4, 0.6}}, {1.0}};
    for (double p : {1.0, 2.0, 3.0}) CHECK(wp_exact(a, b, p).value == doctest::Approx(0.5).epsilon(1e-12));

    for (int k = 0; k < 20; ++k) {
      const auto x = random_measure(rng, 10, 2), y = random_measure(rng, 12, 2), z = random_measure(rng, 9, 2);
      CHECK(wp_exact(x, z, 2.0).value <= wp_exact(x, y, 2.0).value + wp_exact(y, z, 2.0).value + 1e-9);
      CHECK(std::abs(wp_exact(x, y, 2.0).value - wp_exact(y, x, 2.0).value) <= 1e-10);
    }
    CHECK_THROWS_AS(wp_exact(random_measure(rng, 40, 2), random_measure(rng, 40, 2), 2.0, 30), TooManyAtoms);
  }

  TEST_CASE("entropic estimate: debiased zero and translation") {
    const Grid g = Grid::box(I, I, 16, 16);
    const auto a = DiscreteMeasure::from_density(bump(g, {0.4, 0.5}, 0.25));
    CHECK(wp_entropic(a, a, 2.0, 1e-3 * 2.0) <= 1e-6);
    const auto b = DiscreteMeasure::from_density(bump(g, {0.6, 0.5}, 0.25));
    CHECK(wp_entropic(a, b, 2.0, 1e-3 * 2.0) == doctest::Approx(0.2).epsilon(0.03));
    const double exact = wp_exact(a, b, 2.0).value;
    double prev = kInf;
    for (double reg : {4e-3, 2e-3, 1e-3}) {
      const double e = std::abs(wp_entropic(a, b, 2.0, reg) - exact);
      CHECK(e <= prev + 1e-9);
      prev = e;
    }
  }

  TEST_CASE("delta distance bounds") {
    const Grid g = Grid::line(I, 256);
    const auto a = bump(g, {0.4, 0}), b = bump(g, {0.43, 0});
    CHECK(delta_distance(a, a).value == 0.0);
    CHECK(delta_distance(a, b).value <= 2.0);
    CHECK(delta_distance(a, b).value <= 0.03 + 2.0 / 256.0);
    const auto small = delta_distance(a, b, 8), large = delta_distance(a, b, 16);
    CHECK(small.value <= large.value + 1e-15);
    CHECK(large.value <= small.value + small.tail_bound);
    for (int k = 1; k <= 12; ++k)
      for (double x : {0.0, 0.3, 0.77}) CHECK(std::abs(delta_test_function(g, k, {x, 0.0})) <= 1.0);
  }

  TEST_CASE("coarsening conserves mass") {
    const auto f = bump(Grid::box(I, I, 64, 64), {0.5, 0.5}, 0.3);
    const auto c = coarsen(f, 32);
    CHECK(c.grid().cells(0) == 32);
    CHECK(c.mass() == doctest::Approx(f.mass()).epsilon(1e-13));
  }

  TEST_CASE("Hoelder fits: stationary, diffusion, ballistic") {
    const auto flat = run_splitting(DensityField::constant(Grid::line(I, 32), 1.0), DriftSpec::zero(1),
                                    schedule(0.1, 10, 0.01, 1.0, 0.0));
    const auto pairs = pair_distances(flat, DistanceKind::w2, default_strides(flat.size()));
    for (const auto& p : pairs) CHECK(p.value == 0.0);
    CHECK(holder_fit(pairs).stationary);

    auto s = schedule(0.05, 16, 0.00015625, 0.8, 1e-6);
    s.output_every_step = true;
    const auto rough = run_splitting(from_fn(Grid::line(I, 128), [](Vec2 x) { return x[0] < 0.5 ? 0.2 : 1.8; }),
                                     DriftSpec::zero(1), s);
    const auto fit = holder_fit(rough, DistanceKind::w2, default_strides(rough.size()));
    CHECK(fit.exponent >= 0.45);
    CHECK(fit.exponent <= 1.1);

    // Rigid translation at speed 2, sampled exactly.
    TrajectoryRecord ballistic;
    const Grid line = Grid::line(I, 256);
    for (int k = 0; k <= 16; ++k) {
      const double t = 0.0125 * k;
      ballistic.snapshots.emplace_back(line, bump(line, {0.25 + 2.0 * t, 0}, 0.1).data(), t);
    }
    const auto fb = holder_fit(ballistic, DistanceKind::w2, default_strides(ballistic.size()));
    CHECK(fb.exponent == doctest::Approx(1.0).epsilon(0.1));
  }

  TEST_CASE("metric speed") {
    const auto flat = run_splitting(DensityField::constant(Grid::line(I, 32), 1.0), DriftSpec::zero(1),
                                    schedule(0.1, 5, 0.02, 1.0, 0.0));
    const auto r0 = metric_speed(flat, DriftSpec::zero(1), 1.0, 0.0, {1, 2});
    for (const auto& p : r0.pairs) {
      CHECK(p.distance == 0.0);
      CHECK(p.bound == 0.0);
    }

    auto s = schedule(0.05, 10, 0.005, 1.0, 0.0);
    s.on_exit = ExitPolicy::zero_inflow;
    const auto V = DriftSpec::constant(1, {1.0, 0.0});
    const auto tr = run_splitting(bump(Grid::line(I, 128), {0.3, 0}, 0.1), V, s);
    const auto r = metric_speed(tr, V, 1.0, 0.0, {1, 2, 5});
    for (const auto& p : r.pairs) CHECK(p.slack >= -2.0 / 128.0);

    auto sd = schedule(0.05, 10, 0.001, 0.8, 1e-6);
    const auto td = run_splitting(from_fn(Grid::line(I, 128), [](Vec2 x) { return 1.0 + 0.8 * std::cos(3.0 * x[0]); }).normalized(),
                                  DriftSpec::zero(1), sd);
    CHECK(metric_speed(td, DriftSpec::zero(1), 0.8, 1e-6, {1, 2, 5}).violations == 0);
  }
}
