#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qszasz/analysis.hpp"
#include "qszasz/errors.hpp"
#include "qszasz/moments.hpp"

using namespace qszasz;
using doctest::Approx;

namespace {

WeightedFunction monomial(int m) {
  WeightedFunction wf;
  wf.f = RealFunction::generic([m](const auto& t) {
    std::decay_t<decltype(t)> r = 1;
    for (int i = 0; i < m; ++i) r *= t;
    return r;
  });
  wf.p = m;
  wf.f2 = [m](double t) { return m < 2 ? 0.0 : m * (m - 1) * std::pow(t, m - 2); };
  wf.f3 = [m](double t) { return m < 3 ? 0.0 : m * (m - 1) * (m - 2) * std::pow(t, m - 3); };
  wf.f4 = [m](double t) { return m < 4 ? 0.0 : m * (m - 1) * (m - 2) * (m - 3) * std::pow(t, m - 4); };
  return wf;
}

WeightedFunction decay() {
  return {RealFunction::generic([](const auto& t) {
            using std::exp;
            return exp(-t);
          }),
          0, [](double t) { return std::exp(-t); }};
}

WeightedFunction root() {
  return {RealFunction::generic([](const auto& t) {
            using std::sqrt;
            return sqrt(t);
          }),
          0};
}

}  // namespace

TEST_CASE("grid") {
  const auto xs = GridSpec{10.0, 2001}.points();
  CHECK(xs.size() == 2001);
  CHECK(xs.front() == 0.0);
  CHECK(xs.back() == 10.0);
  CHECK(xs[200] == Approx(1.0));
  CHECK_THROWS_AS((GridSpec{10.0, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{0.0, 10}.validate()), std::invalid_argument);
}

TEST_CASE("weighted function validation") {
  CHECK_NOTHROW(monomial(3).validate());
  CHECK_NOTHROW(decay().validate());
  auto wrong = monomial(3);
  wrong.f2 = [](double t) { return 5.0 * t; };
  CHECK_THROWS_AS(wrong.validate(), std::invalid_argument);
  auto negative = monomial(1);
  negative.p = -1;
  CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
}

TEST_CASE("weight function") {
  CHECK(weight_function(0, 5.0) == 1.0);
  CHECK(weight_function(2, 3.0) == Approx(0.1));
}

TEST_CASE("weighted norm") {
  const GridSpec g;
  WeightedFunction c{RealFunction::generic([](const auto& t) { return t * 0 - 2.5; }), 0};
  CHECK(weighted_norm(c, g) == 2.5);
  CHECK(weighted_norm(monomial(2), g) == Approx(100.0 / 101.0).epsilon(1e-15));
  auto cube = monomial(3);
  cube.p = 2;
  CHECK(weighted_norm(cube, g) == Approx(1000.0 / 101.0).epsilon(1e-15));
  WeightedFunction pole{RealFunction::generic([](const auto& t) { return 1 / (t - 1); }), 0};
  try {
    weighted_norm(pole, g);
    FAIL("expected NonFiniteValue");
  } catch (const NonFiniteValue& e) {
    CHECK(e.where() == 1.0);
  }
}

TEST_CASE("second modulus") {
  const GridSpec g;
  WeightedFunction line{RealFunction::generic([](const auto& t) { return 4 * t + 1; }), 1};
  CHECK(second_modulus(line, 0.3, g) == Approx(0.0).scale(1.0).epsilon(1e-12));
  auto sq = monomial(2);
  sq.p = 0;
  for (double d : {0.05, 0.5, 1.0}) CHECK(second_modulus(sq, d, g) == Approx(2 * d * d).epsilon(1e-12));

  // Brute force over a dense uniform h grid.
  const auto xs = g.points();
  double brute = 0.0;
  for (int i = 1; i <= 400; ++i) {
    const double h = 0.1 * i / 400;
    for (double x : xs) brute = std::max(brute, std::fabs(std::exp(-x - 2 * h) - 2 * std::exp(-x - h) + std::exp(-x)));
  }
  CHECK(second_modulus(decay(), 0.1, g) == Approx(brute).epsilon(1e-12));
  CHECK_THROWS_AS(second_modulus(decay(), 0.0, g), std::invalid_argument);
}

TEST_CASE("first modulus") {
  const GridSpec g;
  CHECK(first_modulus([](double t) { return t; }, 0.25, g) == Approx(0.25).epsilon(1e-14));
  CHECK(first_modulus([](double) { return 3.0; }, 0.7, g) == 0.0);
  // f*(z) = f(z^2) for f = sqrt is the identity on the z-grid.
  const GridSpec zg{std::sqrt(10.0), 2001};
  CHECK(first_modulus([](double z) { return std::sqrt(z * z); }, 0.1, zg) == Approx(0.1).epsilon(1e-13));
  // Brute force over all grid pairs on a small grid.
  const GridSpec small{2.0, 41};
  const auto xs = small.points();
  double brute = 0.0;
  for (double a : xs) {
    for (double b : xs) {
      if (std::fabs(a - b) <= 0.3 + 1e-12) brute = std::max(brute, std::fabs(std::sin(3 * a) - std::sin(3 * b)));
    }
  }
  CHECK(first_modulus([](double t) { return std::sin(3 * t); }, 0.3, small) >= brute - 1e-15);
}

TEST_CASE("Steklov means") {
  WeightedFunction line{RealFunction::generic([](const auto& t) { return 2 * t - 1; }), 1};
  for (double x : {0.0, 1.0, 3.5}) {
    const auto v = steklov(line, 0.3, x);
    CHECK(v.fh == Approx(2 * x - 1).epsilon(1e-10).scale(1.0));
    CHECK(v.fh2 == Approx(0.0).scale(1.0).epsilon(1e-10));
  }
  // For t^2: 2 f(x+u) - f(x+2u) = x^2 - 2u^2 with E[(s+t)^2] = 7h^2/24.
  const auto sq = monomial(2);
  const auto v = steklov(sq, 0.5, 1.0);
  CHECK(v.fh2 == Approx(2.0).epsilon(1e-12));
  CHECK(v.fh == Approx(1.0 - 7.0 * 0.25 / 12.0).epsilon(1e-13));
  CHECK_THROWS_AS(steklov(sq, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("Steklov check on the corpus") {
  const GridSpec g;
  WeightedFunction invsq{RealFunction::generic([](const auto& t) { return 1 / (1 + t * t); }), 0};
  WeightedFunction wave{RealFunction::generic([](const auto& t) {
                          using std::sin;
                          return sin(t);
                        }),
                        0};
  for (const auto& wf : {decay(), invsq, wave}) {
    for (double h : {0.4, 0.2, 0.1}) {
      const auto c = steklov_check(wf, h, g);
      CHECK(c.error_bound_holds);
      CHECK(c.fh2_ratio > 0.0);
      CHECK(std::isfinite(c.fh2_ratio));
    }
  }
}

TEST_CASE("line fit") {
  const auto fit = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(fit.slope == Approx(2.0));
  CHECK(fit.intercept == Approx(1.0));
  CHECK_THROWS_AS(fit_line({1}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(fit_line({1, 1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("convergence experiment reproduces the closed forms") {
  const GridSpec g{4.0, 81};
  WeightedFunction one{RealFunction::generic([](const auto& t) { return t * 0 + 1; }), 0};
  for (double q : {1.2, 2.0}) {
    const auto r1 = convergence_experiment(one, q, {1, 8}, g);
    for (const auto& row : r1.rows) CHECK(row.lhs <= 1e-12);
    const auto r2 = convergence_experiment(monomial(2), q, {1, 8}, g);
    REQUIRE(r2.rows.size() == 8);
    for (const auto& row : r2.rows) {
      // w_2(x) x/[n] peaks at x = 1.
      CHECK(row.lhs == Approx(0.5 / row.aux).epsilon(1e-10));
      CHECK(row.x == Approx(1.0));
      CHECK(row.failure.empty());
    }
    REQUIRE(r2.fitted_slope);
  }
}

TEST_CASE("convergence rate slopes") {
  const GridSpec g{4.0, 81};
  for (double q : {1.5, 2.0}) {
    const auto r = convergence_experiment(monomial(2), q, {10, 40}, g);
    REQUIRE(r.fitted_slope);
    CHECK(*r.fitted_slope == Approx(-std::log(q)).epsilon(0.05));
  }
  const auto c = convergence_experiment(monomial(2), 2.0, {4, 64}, g, {}, true);
  REQUIRE(c.fitted_slope);
  CHECK(*c.fitted_slope == Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("doubling the grid does not move the weighted sup") {
  const auto a = convergence_experiment(monomial(2), 2.0, {3, 5}, GridSpec{10.0, 201});
  const auto b = convergence_experiment(monomial(2), 2.0, {3, 5}, GridSpec{20.0, 401});
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(std::fabs(a.rows[i].lhs - b.rows[i].lhs) < 1e-3 * a.rows[i].lhs);
  }
}

TEST_CASE("Voronovskaja scan on polynomials") {
  for (double q : {1.5, 2.0, 3.0}) {
    for (double x : {0.5, 2.0}) {
      const auto r2 = voronovskaja_scan(monomial(2), q, x, {1, 10});
      for (const auto& row : r2.rows) {
        CHECK(row.lhs == Approx(x).epsilon(1e-10));
        CHECK(row.rhs == Approx(x));
      }
      const auto r3 = voronovskaja_scan(monomial(3), q, x, {1, 10});
      for (const auto& row : r3.rows) {
        const double qn = q_integer(row.n, QContext(q, row.n));
        CHECK(row.lhs == Approx((2 + q) * x * x + x / qn).epsilon(1e-10));
        CHECK(row.rhs == Approx(3 * x * x));
        CHECK(row.aux == Approx((2 + q) * x * x).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("Voronovskaja scan agrees with the moment polynomials") {
  for (int m = 1; m <= 4; ++m) {
    for (double q : {1.3, 2.0}) {
      const double x = 1.7;
      const auto r = voronovskaja_scan(monomial(m), q, x, {1, 8});
      for (const auto& row : r.rows) {
        const QContext c(q, row.n);
        const double algebraic = q_integer(row.n, c) * (moment_polynomial(m, c)(x) - std::pow(x, m));
        CHECK(row.lhs == Approx(algebraic).epsilon(1e-10).scale(1.0));
      }
    }
  }
}

TEST_CASE("Voronovskaja limit approaches 3x^2 for t^3 as q -> 1") {
  const double x = 1.2;
  double previous = INFINITY;
  for (int j = 1; j <= 4; ++j) {
    const double q = 1.0 + std::pow(10.0, -j);
    const auto r = voronovskaja_scan(monomial(3), q, x, {60, 60});
    const auto& row = r.rows.back();
    REQUIRE(row.failure.empty());
    // Removing the x/[n] term leaves the fixed-q limit (2 + q) x^2.
    const double limit = row.lhs - x / q_integer(60, QContext(q, 60));
    const double gap = std::fabs(limit - 3 * x * x);
    CHECK(gap == Approx((q - 1) * x * x).epsilon(1e-8));
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous < 2e-4);
  CHECK_THROWS_AS(voronovskaja_scan(root(), 2.0, 1.0, {1, 2}), std::invalid_argument);
}

TEST_CASE("Voronovskaja scan records precision exhaustion per row") {
  const auto r = voronovskaja_scan(monomial(3), 1.1, 1.2, {100, 400});
  CHECK(r.rows.front().failure.empty());
  CHECK(!r.rows.back().failure.empty());
  CHECK(std::isnan(r.rows.back().lhs));
  CHECK(r.numerical_failure);
}

TEST_CASE("local bound ratio is independent of n for t^2") {
  const auto r = bound_check(BoundMode::local, monomial(2), 2.0, {1, 10}, GridSpec{4.0, 81});
  REQUIRE(r.fitted_constant);
  const double first = r.rows.front().ratio;
  for (const auto& row : r.rows) CHECK(row.ratio == Approx(first).epsilon(1e-9));
  CHECK(*r.fitted_constant == Approx(first).epsilon(1e-9));
}

TEST_CASE("global bound check reports finite ratios") {
  const auto r = bound_check(BoundMode::global, decay(), 2.0, {1, 6}, GridSpec{5.0, 201});
  REQUIRE(r.fitted_constant);
  CHECK(std::isfinite(*r.fitted_constant));
  for (const auto& row : r.rows) {
    CHECK(row.rhs > 0.0);
    CHECK(std::isfinite(row.ratio));
  }
}

TEST_CASE("sqrt-modulus bound structure") {
  const auto r = bound_check(BoundMode::sqrtmod, root(), 2.0, {1, 3}, GridSpec{});
  REQUIRE(r.rows.size() == 3);
  for (const auto& row : r.rows) {
    // omega(identity; 1/sqrt([n])) = 1/sqrt([n]).
    CHECK(row.rhs == Approx(2.0 / std::sqrt(row.aux)).epsilon(1e-12));
  }
  CHECK(r.rows[0].lhs <= r.rows[0].rhs);
  // The operator is not positive: at q = 2, n = 3 the deviation at x = 10 is about 77.9.
  CHECK(r.rows[2].lhs == Approx(77.930358082687493).epsilon(1e-10));
  CHECK(r.bound_violated);
}
