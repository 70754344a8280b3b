#include <doctest.h>

#include <cmath>
#include <random>

#include "fdlab/drift.hpp"

using namespace fdlab;

TEST_SUITE("drift") {
  TEST_CASE("evaluate examples") {
    const auto rot = DriftSpec::rigid_rotation(1.0, {0.3, 0.4});
    const Vec2 z = rot.evaluate({0.3, 0.4}, 0.0);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);
    const Vec2 c = DriftSpec::constant(2, {1.0, 0.0}).evaluate({0.7, 0.2}, 0.5);
    CHECK(c[0] == 1.0);
    CHECK(c[1] == 0.0);
    const Vec2 s = DriftSpec::shear(1.0, 0.25).evaluate({0.6, 0.25}, 0.0);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 0.0);
  }

  TEST_CASE("divergence examples") {
    const auto rot = DriftSpec::rigid_rotation(2.0, {0.5, 0.5}, 0.3, 0.45);
    for (double x : {0.2, 0.5, 0.71, 0.9}) CHECK(std::abs(rot.divergence({x, 0.4}, 0.0)) <= 1e-12);
    CHECK(DriftSpec::potential_quadratic(2, 1.0, {0, 0}).divergence({0.3, 0.8}, 0.0) ==
          doctest::Approx(2.0));
    CHECK(DriftSpec::potential_quadratic(1, 1.0, {0, 0}).divergence({0.3, 0.0}, 0.0) ==
          doctest::Approx(1.0));
  }

  TEST_CASE("analytic Jacobian agrees with central differences") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0.05, 0.95);
    const Interval I{0, 1};
    const std::vector<DriftSpec> kinds{
        DriftSpec::rigid_rotation(3.0, {0.5, 0.5}, 0.3, 0.45),
        DriftSpec::stream_function(0.7, 2, 1, I, I),
        DriftSpec::potential_cosine(2, 0.4, 2, I, I),
        DriftSpec::shear(1.5, 0.5, true, I),
        DriftSpec::time_modulated(DriftSpec::stream_function(1.0, 1, 1, I, I), 1.0, 0.5, 2.0)};
    for (const auto& V : kinds)
      for (int k = 0; k < 10; ++k) {
        const Vec2 x{U(rng), U(rng)};
        const Mat2 a = V.jacobian(x, 0.3), f = V.jacobian_fd(x, 0.3, 1e-5);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) CHECK(std::abs(a[i][j] - f[i][j]) <= 1e-6);
        CHECK(std::abs(V.divergence(x, 0.3) - (a[0][0] + a[1][1])) <= 1e-12);
      }
  }

  TEST_CASE("declarations match sampled behaviour") {
    const Interval I{0, 1};
    const Grid dom = Grid::box(I, I, 16, 16);
    const auto rot = check_declarations(DriftSpec::rigid_rotation(1.0, {0.5, 0.5}, 0.4, 0.49), dom, 1.0);
    CHECK(rot.divergence_free_ok);
    CHECK(rot.zero_flux_ok);
    const auto cell = check_declarations(DriftSpec::stream_function(1.0, 1, 1, I, I), dom, 1.0);
    CHECK(cell.divergence_free_ok);
    CHECK(cell.zero_flux_ok);
    const auto wind = DriftSpec::constant(2, {1.0, 0.0});
    CHECK_FALSE(wind.declared_zero_normal_flux());
  }

  TEST_CASE("classify: critical boundary point of the S class") {
    const Interval I{0, 1};
    ClassifyContext ctx{Grid::box(I, I, 16, 16), 1.0};
    const auto V = DriftSpec::stream_function(0.3, 1, 1, I, I);
    const auto r = classify(V, 0.8, 1.0, {kInf, 8.0 / 3.0}, DriftClass::S, ctx);
    CHECK(r.lhs == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(r.rhs == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(r.member);
    CHECK(r.critical);
  }

  TEST_CASE("classify: zero drift and rotation") {
    const Interval I{0, 1};
    ClassifyContext ctx{Grid::box(I, I, 16, 16), 1.0};
    for (auto c : {DriftClass::S, DriftClass::S_tilde, DriftClass::D, DriftClass::D_plus, DriftClass::D_s}) {
      const auto r = classify(DriftSpec::zero(2), 0.8, 1.0, {4.0, 4.0}, c, ctx);
      CHECK(r.member);
      CHECK(r.norm == 0.0);
    }
    const auto r = classify(DriftSpec::rigid_rotation(1.0, {0.5, 0.5}, 0.4, 0.49), 0.8, 1.0, {kInf, kInf},
                            DriftClass::D, ctx);
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == doctest::Approx(1.6));
    CHECK(r.member);
    CHECK_FALSE(r.critical);
  }

  TEST_CASE("classify flags m outside the class range") {
    const Interval I{0, 1};
    ClassifyContext ctx{Grid::box(I, I, 16, 16), 1.0};
    const auto r = classify(DriftSpec::zero(2), 0.3, 1.0, {kInf, kInf}, DriftClass::S, ctx);
    CHECK_FALSE(r.m_in_range);
    CHECK_FALSE(r.member);
  }

  TEST_CASE("class lhs is monotone in the inverse exponents") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (auto c : {DriftClass::S, DriftClass::S_tilde, DriftClass::D, DriftClass::D_plus, DriftClass::D_s})
      for (int k = 0; k < 50; ++k) {
        const double m = 0.55 + 0.4 * U(rng), q = 1.0 + U(rng);
        const double a1 = U(rng), a2 = U(rng), e = 0.1 * U(rng);
        const auto L0 = class_line(c, 2, m, q, {1.0 / a1, 1.0 / a2});
        const auto L1 = class_line(c, 2, m, q, {1.0 / (a1 + e), 1.0 / a2});
        const auto L2 = class_line(c, 2, m, q, {1.0 / a1, 1.0 / (a2 + e)});
        CHECK(L1.lhs >= L0.lhs - 1e-14);
        CHECK(L2.lhs >= L0.lhs - 1e-14);
      }
  }

  TEST_CASE("class names round trip") {
    for (auto c : {DriftClass::S, DriftClass::S_tilde, DriftClass::D, DriftClass::D_plus, DriftClass::D_s})
      CHECK(class_from_name(class_name(c)) == c);
    CHECK_THROWS(class_from_name("Q"));
  }
}
