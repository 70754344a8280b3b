#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fdlab/diagnostics.hpp"
#include "fdlab/splitting.hpp"

using namespace fdlab;

namespace {
const double pi = std::numbers::pi;
const Interval I{0, 1};

DensityField from_fn(const Grid& g, auto fn) {
  std::vector<double> v(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) v[k] = fn(g.center(k));
  return DensityField(g, std::move(v));
}

SplittingSchedule schedule(double T, int n, double dt, double m, double eps) {
  SplittingSchedule s;
  s.T = T;
  s.n = n;
  s.diffusion.dt = dt;
  s.diffusion.m = m;
  s.diffusion.epsilon = eps;
  s.rk_steps = 16;
  return s;
}

DensityField bump2d(int n) {
  return from_fn(Grid::box(I, I, n, n), [](Vec2 x) {
           return 0.1 + std::exp(-((x[0] - 0.4) * (x[0] - 0.4) + (x[1] - 0.55) * (x[1] - 0.55)) / 0.01);
         }).normalized();
}

std::vector<TimeSample> series_of(const TrajectoryRecord& tr) {
  std::vector<TimeSample> s;
  for (const auto& f : tr.snapshots) s.push_back({f.time(), f.scalar()});
  return s;
}

std::vector<TimeSample> frozen(const DensityField& f, int samples) {
  std::vector<TimeSample> s;
  for (int k = 0; k < samples; ++k) s.push_back({0.1 * k, f.scalar()});
  return s;
}

DriftClassReport classified(const DriftSpec& V, double m, double q, DriftClass c, const MixedNormSpec& e,
                            const TrajectoryRecord& tr) {
  return classify(V, m, q, e, c, ClassifyContext{tr.grid(), tr.horizon()});
}
}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("entropy closed forms") {
    const Grid g = Grid::box({0, 2}, {0, 1}, 16, 8);
    CHECK(entropy(DensityField::constant(g, 0.5)) == doctest::Approx(std::log(0.5)).epsilon(1e-13));
    const Grid line = Grid::line(I, 256);
    std::vector<double> spike(256, 0.0);
    spike[100] = 256.0;
    CHECK(entropy(DensityField(line, spike)) == doctest::Approx(std::log(256.0)).epsilon(1e-13));
    // Half the domain carries all the mass at density 2/|Omega|.
    const auto half = from_fn(g, [](Vec2 x) { return x[0] < 1.0 ? 1.0 : 0.0; });
    CHECK(entropy(half) == doctest::Approx(std::log(2.0 / g.measure())).epsilon(1e-13));
    const auto blocks = from_fn(line, [](Vec2 x) { return x[0] < 0.25 || x[0] >= 0.75 ? 2.0 : 0.0; });
    CHECK(entropy(blocks) == doctest::Approx(std::log(2.0)).epsilon(1e-13));
    CHECK(abs_entropy(DensityField::constant(line, 0.5)) == doctest::Approx(0.5 * std::log(2.0)));
  }

  TEST_CASE("Fisher speed: constants, power law, Gaussian") {
    CHECK(fisher_speed(DensityField::constant(Grid::line(I, 32), 1.3), 0.75, 0.0) == 0.0);

    // rho = 2x, m = 3/2: the integrand is the constant m^2 * 4 = 9; the two
    // boundary faces carry no flux, so the discrete value is 9 (1 - h).
    const auto ramp = from_fn(Grid::line(I, 512), [](Vec2 x) { return 2.0 * x[0]; });
    CHECK(fisher_speed(ramp, 1.5, 0.0) == doctest::Approx(9.0 * 511.0 / 512.0).epsilon(1e-10));
    // rho = 1 + x, m = 3/4: m^2 int (1+x)^(-3/2) = (9/16) * 2 (1 - 2^(-1/2)).
    const auto shifted_ramp = from_fn(Grid::line(I, 512), [](Vec2 x) { return 1.0 + x[0]; });
    CHECK(fisher_speed(shifted_ramp, 0.75, 0.0) ==
          doctest::Approx(1.125 * (1.0 - 1.0 / std::sqrt(2.0))).epsilon(0.01));

    const double sigma = 0.05;
    const auto gauss = from_fn(Grid::line(I, 1024), [&](Vec2 x) {
                         const double r = x[0] - 0.5;
                         return std::abs(r) < 5.0 * sigma ? std::exp(-0.5 * r * r / (sigma * sigma)) : 0.0;
                       }).normalized();
    CHECK(fisher_speed(gauss, 1.0, 0.0) == doctest::Approx(1.0 / (sigma * sigma)).epsilon(0.02));
  }

  TEST_CASE("Fisher speed: both discretisations agree on smooth positive data") {
    const auto f = bump2d(64);
    for (double m : {0.6, 0.8, 1.0, 2.0}) {
      const double eps = 1e-3;
      CHECK(fisher_speed(f, m, eps) == doctest::Approx(fisher_speed_direct(f, m, eps)).epsilon(0.01));
    }
  }

  TEST_CASE("energy budget: zero drift has no drift terms") {
    const auto tr = run_splitting(bump2d(24), DriftSpec::zero(2), schedule(0.02, 4, 0.0025, 0.8, 1e-6));
    for (double q : {1.0, 2.0}) {
      const auto cls = classified(DriftSpec::zero(2), 0.8, q, DriftClass::D, {kInf, kInf}, tr);
      BudgetOptions opt;
      opt.epsilon = 1e-6;
      const auto b = energy_budget(tr, DriftSpec::zero(2), 0.8, q, cls, opt);
      CHECK(b.drift_speed == 0.0);
      CHECK(b.divergence_integral == 0.0);
      CHECK(b.satisfied);
      CHECK(b.speed_ok);
    }
  }

  TEST_CASE("energy budget: rotation, q = 2, and truncation keeps it satisfied") {
    const auto V = DriftSpec::rigid_rotation(2.0 * pi, {0.5, 0.5}, 0.42, 0.49);
    auto s = schedule(0.05, 4, 0.003125, 0.8, 1e-6);
    s.output_every_step = true;
    const auto tr = run_splitting(bump2d(32), V, s);
    const auto cls = classified(V, 0.8, 2.0, DriftClass::D, {kInf, kInf}, tr);
    BudgetOptions opt;
    opt.epsilon = 1e-6;
    const auto b = energy_budget(tr, V, 0.8, 2.0, cls, opt);
    CHECK(b.satisfied);
    CHECK(std::isfinite(b.rhs_constant));
    CHECK(b.sup_value <= b.initial_value + 1e-10);

    TrajectoryRecord half = tr;
    half.snapshots.resize(tr.size() / 2 + 1);
    half.diagnostics.resize(half.snapshots.size());
    const auto bh = energy_budget(half, V, 0.8, 2.0, cls, opt);
    CHECK(bh.satisfied);
    CHECK(bh.rhs_constant == b.rhs_constant);
  }

  TEST_CASE("energy budget: windowed shear in the S class, q = 1") {
    const auto V = DriftSpec::shear(1.0, 0.5, true, I);
    const auto tr = run_splitting(bump2d(24), V, schedule(0.04, 4, 0.0025, 0.8, 1e-6));
    const auto cls = classified(V, 0.8, 1.0, DriftClass::S, {kInf, kInf}, tr);
    REQUIRE(cls.member);
    BudgetOptions opt;
    opt.epsilon = 1e-6;
    const auto b = energy_budget(tr, V, 0.8, 1.0, cls, opt);
    CHECK(std::isfinite(b.rhs_constant));
    CHECK(b.satisfied);
  }

  TEST_CASE("parabolic Sobolev embedding") {
    const Grid g = Grid::box(I, I, 16, 16);
    const auto c = verify_parabolic_sobolev(frozen(DensityField::constant(g, 0.7), 4), 1.0, 1.0);
    CHECK(c.holds_without_c);
    CHECK(std::isfinite(c.constant));
    const auto z = verify_parabolic_sobolev(frozen(DensityField::constant(g, 0.0), 4), 1.0, 1.0);
    CHECK(z.lhs == 0.0);
    CHECK(z.constant == 0.0);

    std::vector<double> cs;
    for (int n : {32, 64}) {
      const auto f = from_fn(Grid::box(I, I, n, n), [](Vec2 x) { return 1.0 + 0.9 * std::cos(pi * x[0]); });
      cs.push_back(verify_parabolic_sobolev(frozen(f, 4), 1.0, 1.0).constant);
    }
    CHECK(std::isfinite(cs[0]));
    CHECK(cs[1] == doctest::Approx(cs[0]).epsilon(0.10));
  }

  TEST_CASE("interpolation inequality") {
    const double m = 0.8, q = 1.0, p = 1.0, r2 = 2.0;
    const double r1 = interpolation_r1(2, p, q, m, r2);
    const auto tr = run_splitting(from_fn(Grid::box(I, I, 32, 32), [](Vec2 x) { return x[0] < 0.5 ? 0.2 : 1.8; }),
                                  DriftSpec::zero(2), schedule(0.02, 8, 0.0025, m, 1e-6));
    const auto r = verify_interpolation(series_of(tr), p, q, m, r1, r2);
    CHECK(std::abs(r.relation_residual) <= 1e-12);
    CHECK(r.constant <= 10.0);

    const auto tr2 = run_splitting(from_fn(Grid::box(I, I, 64, 64), [](Vec2 x) { return x[0] < 0.5 ? 0.2 : 1.8; }),
                                   DriftSpec::zero(2), schedule(0.02, 8, 0.0025, m, 1e-6));
    const auto r_fine = verify_interpolation(series_of(tr2), p, q, m, r1, r2);
    CHECK(r_fine.constant == doctest::Approx(r.constant).epsilon(0.10));

    const auto u = verify_interpolation(frozen(DensityField::constant(Grid::box(I, I, 8, 8), 1.0), 3), p, q, m, r1, r2);
    CHECK(u.lhs <= u.mass_term * (1 + 1e-12));

    // r1 = p, r2 = infinity: the left side is the sup of the L^p norm.
    const auto e = verify_interpolation(series_of(tr), p, q, m, p, kInf);
    CHECK(e.lhs == doctest::Approx(e.gradient_term).epsilon(1e-12));

    CHECK_THROWS_AS(verify_interpolation(series_of(tr), p, q, m, 3.0, 2.0), std::invalid_argument);
  }

  TEST_CASE("interpolation constant scales with the stated homogeneity") {
    const double m = 0.8, q = 1.5, p = 1.2, r2 = 3.0;
    const double r1 = interpolation_r1(2, p, q, m, r2);
    const auto f = from_fn(Grid::box(I, I, 24, 24), [](Vec2 x) { return 1.0 + 0.5 * std::cos(pi * x[0]) * std::cos(pi * x[1]); });
    std::vector<TimeSample> a, b;
    for (int k = 0; k < 4; ++k) {
      auto g = f.scaled(1.0 + 0.2 * k);
      a.push_back({0.1 * k, g.scalar()});
      b.push_back({0.1 * k, g.scaled(3.0).scalar()});
    }
    const auto ra = verify_interpolation(a, p, q, m, r1, r2);
    const auto rb = verify_interpolation(b, p, q, m, r1, r2);
    if (ra.constant > 0.0) {
      const double e = std::log(rb.constant / ra.constant) / std::log(3.0);
      CHECK(e == doctest::Approx(ra.homogeneity_exponent).epsilon(1e-6));
    }
  }

  TEST_CASE("V rho bound") {
    const auto tr = run_splitting(bump2d(16), DriftSpec::zero(2), schedule(0.02, 2, 0.005, 0.8, 1e-6));
    const auto z = vrho_l1_bound(tr, DriftSpec::zero(2), {kInf, kInf});
    CHECK(z.lhs == 0.0);
    CHECK(z.holds);

    const auto c = DensityField::constant(Grid::box(I, I, 8, 8), 1.0);
    const auto trc = run_splitting(c, DriftSpec::zero(2), schedule(0.02, 2, 0.005, 1.0, 0.0));
    const auto eq = vrho_l1_bound(trc, DriftSpec::constant(2, {0.3, 0.4}), {2.0, 2.0});
    CHECK(eq.lhs == doctest::Approx(eq.rhs).epsilon(1e-10));

    const auto V = DriftSpec::rigid_rotation(2.0 * pi, {0.5, 0.5}, 0.42, 0.49);
    const auto trr = run_splitting(bump2d(24), V, schedule(0.02, 2, 0.005, 0.8, 1e-6));
    const auto rr = vrho_l1_bound(trr, V, {4.0, 4.0});
    CHECK(rr.holds);
    CHECK(rr.lhs < rr.rhs);
  }
}
