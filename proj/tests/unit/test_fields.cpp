#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fdlab/fields.hpp"

using namespace fdlab;

namespace {
DensityField from_fn(const Grid& g, auto fn) {
  std::vector<double> v(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) v[k] = fn(g.center(k));
  return DensityField(g, std::move(v));
}
}  // namespace

TEST_SUITE("fields") {
  TEST_CASE("integrate: constant, zero, half indicator") {
    const Grid sq = Grid::box({0, 1}, {0, 1}, 16, 16);
    CHECK(integrate(DensityField::constant(sq, 3.5)) == doctest::Approx(3.5).epsilon(1e-14));
    CHECK(integrate(DensityField::constant(sq, 0.0)) == 0.0);
    const Grid line = Grid::line({0, 1}, 64);
    const auto half = from_fn(line, [](Vec2 x) { return x[0] < 0.5 ? 1.0 : 0.0; });
    CHECK(integrate(half) == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("integrate is linear and monotone") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 2.0);
    const Grid g = Grid::box({0, 2}, {-1, 1}, 12, 9);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> a(g.size()), b(g.size()), c(g.size());
      for (auto& x : a) x = U(rng);
      for (auto& x : b) x = U(rng);
      const double al = U(rng), be = U(rng);
      for (std::size_t k = 0; k < g.size(); ++k) c[k] = al * a[k] + be * b[k];
      const double lhs = integrate(ScalarField{g, c});
      const double rhs = al * integrate(ScalarField{g, a}) + be * integrate(ScalarField{g, b});
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
      std::vector<double> d = a;
      for (std::size_t k = 0; k < g.size(); ++k) d[k] += b[k];
      CHECK(integrate(ScalarField{g, d}) >= integrate(ScalarField{g, a}));
    }
  }

  TEST_CASE("lq_norm examples") {
    const Grid g = Grid::line({0, 1}, 256);
    CHECK(lq_norm(DensityField::constant(g, 2.0), 2.0) == doctest::Approx(2.0).epsilon(1e-13));
    const auto p = from_fn(g, [](Vec2 x) { return 1.0 + 0.5 * std::cos(3.0 * x[0]); }).normalized();
    CHECK(lq_norm(p, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    const auto ramp = from_fn(g, [](Vec2 x) { return x[0]; });
    CHECK(std::abs(lq_norm(ramp, 2.0) - 1.0 / std::sqrt(3.0)) <= 1e-4);
  }

  TEST_CASE("lq_norm is bounded by measure^(1/q) times the sup") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 5.0);
    const Grid g = Grid::box({0, 3}, {0, 2}, 10, 7);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> v(g.size());
      for (auto& x : v) x = U(rng);
      const DensityField f(g, v);
      for (double q : {1.0, 1.5, 2.0, 4.0})
        CHECK(lq_norm(f, q) <= std::pow(g.measure(), 1.0 / q) * sup_abs(v) * (1 + 1e-14));
    }
  }

  TEST_CASE("grad_power examples") {
    const Grid g = Grid::line({0, 1}, 256);
    CHECK(grad_power(DensityField::constant(g, 0.7), 0.6).max_abs() == 0.0);
    const auto lin = from_fn(g, [](Vec2 x) { return x[0]; });
    const auto gl = grad_power(lin, 1.0);
    for (int i = 1; i < 256; ++i) CHECK(std::abs(gl.gx(i, 0) - 1.0) <= 1e-12);
    const double pi = std::numbers::pi;
    const auto s = from_fn(g, [&](Vec2 x) { return std::sin(pi * x[0]); });
    const auto gs = grad_power(s, 2.0);
    double err = 0.0;
    for (int i = 1; i < 256; ++i) {
      const double xf = i / 256.0;
      err = std::max(err, std::abs(gs.gx(i, 0) - 2.0 * pi * std::sin(pi * xf) * std::cos(pi * xf)));
    }
    CHECK(err <= 1e-3);
  }

  TEST_CASE("mixed_norm examples") {
    const Grid g = Grid::box({0, 2}, {0, 1}, 8, 4);
    std::vector<TimeSample> series;
    for (int k = 0; k <= 10; ++k)
      series.push_back({0.3 * k, ScalarField{g, std::vector<double>(g.size(), 1.5)}});
    const double T = 3.0, vol = 2.0;
    CHECK(mixed_norm(series, {2.0, 3.0}) ==
          doctest::Approx(1.5 * std::pow(vol, 0.5) * std::pow(T, 1.0 / 3.0)).epsilon(1e-12));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double mx = 0.0;
    for (auto& s : series)
      for (auto& v : s.field.values) mx = std::max(mx, v = U(rng));
    CHECK(mixed_norm(series, {kInf, kInf}) == mx);

    const Grid line = Grid::line({0, 1}, 16);
    std::vector<TimeSample> ts;
    for (int k = 0; k < 64; ++k) {
      const double t = k / 63.0;
      ts.push_back({t, ScalarField{line, std::vector<double>(line.size(), t)}});
    }
    CHECK(std::abs(mixed_norm(ts, {1.0, 2.0}) - 1.0 / std::sqrt(3.0)) <= 2e-3);
  }

  TEST_CASE("mixed_norm with equal exponents is the space-time norm") {
    const Grid g = Grid::line({0, 1}, 10);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<TimeSample> ts;
    for (int k = 0; k < 9; ++k) {
      std::vector<double> v(g.size());
      for (auto& x : v) x = U(rng);
      ts.push_back({0.125 * k, ScalarField{g, v}});
    }
    std::vector<double> times, vals;
    for (auto& s : ts) {
      times.push_back(s.time);
      double acc = 0.0;
      for (double v : s.field.values) acc += v * v * g.cell_volume();
      vals.push_back(acc);
    }
    const auto w = trapezoid_weights(times);
    double direct = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) direct += w[k] * vals[k];
    CHECK(std::abs(mixed_norm(ts, {2.0, 2.0}) - std::sqrt(direct)) <= 1e-10);
  }

  TEST_CASE("mixed grids are rejected") {
    std::vector<TimeSample> ts{{0.0, ScalarField{Grid::line({0, 1}, 8), std::vector<double>(8, 1.0)}},
                               {1.0, ScalarField{Grid::line({0, 1}, 16), std::vector<double>(16, 1.0)}}};
    CHECK_THROWS(mixed_norm(ts, {2.0, 2.0}));
  }

  TEST_CASE("density invariants") {
    const Grid g = Grid::line({0, 1}, 8);
    CHECK_THROWS(DensityField(g, std::vector<double>(8, -1.0)));
    CHECK_THROWS(DensityField::constant(g, 0.0).normalized());
    CHECK(DensityField::constant(g, 3.0).normalized().mass() == doctest::Approx(1.0).epsilon(1e-12));
  }
}
