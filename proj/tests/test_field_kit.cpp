#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "carleman/analytic.hpp"
#include "carleman/errors.hpp"
#include "carleman/grid.hpp"
#include "carleman/linalg.hpp"
#include "carleman/rng.hpp"
#include "carleman/taylor.hpp"

using namespace carleman;
using namespace carleman::fields;

TEST_CASE("taylor arithmetic reproduces known derivatives") {
  // f(t, x) = exp(t) * sin(x) at (0.3, 0.7)
  const Taylor t = Taylor::variable(2, 4, 0, 0.3);
  const Taylor x = Taylor::variable(2, 4, 1, 0.7);
  const Taylor sx = x.compose(std::array<double, 5>{std::sin(0.7), std::cos(0.7), -std::sin(0.7), -std::cos(0.7),
                                                    std::sin(0.7)});
  const Taylor f = fields::exp(t) * sx;
  const double e = std::exp(0.3);
  CHECK(f.value() == doctest::Approx(e * std::sin(0.7)).epsilon(1e-15));
  CHECK(f.d1(0) == doctest::Approx(e * std::sin(0.7)).epsilon(1e-15));
  CHECK(f.d2(1, 1) == doctest::Approx(-e * std::sin(0.7)).epsilon(1e-15));
  CHECK(f.derivative({2, 2, 0}) == doctest::Approx(-e * std::sin(0.7)).epsilon(1e-14));
  CHECK(f.derivative({1, 3, 0}) == doctest::Approx(-e * std::cos(0.7)).epsilon(1e-14));
  CHECK(f.diff(1).order() == 3);
}

TEST_CASE("taylor sqrt and pow invert each other") {
  const Taylor g = Taylor::variable(1, 4, 0, 2.0) * Taylor::variable(1, 4, 0, 2.0) + 1.0;  // 1 + t^2 at t = 2
  const Taylor s = fields::sqrt(g);
  const Taylor back = s * s;
  for (int k = 0; k <= 4; ++k) CHECK(back.derivative({k, 0, 0}) == doctest::Approx(g.derivative({k, 0, 0})).epsilon(1e-13));
  const Taylor p = fields::pow(g, -1.5);
  // d/dt (1+t^2)^{-3/2} = -3t (1+t^2)^{-5/2}
  CHECK(p.d1(0) == doctest::Approx(-6.0 * std::pow(5.0, -2.5)).epsilon(1e-14));
}

TEST_CASE("monomial bookkeeping") {
  CHECK(monomial_count(3, 4) == 35);
  CHECK(monomial_count(2, 2) == 6);
  CHECK(monomials(3).size() == 35);
}

// Jets against central differences of the function values with h = 1e-4.
TEST_CASE("analytic jets agree with finite differences of values") {
  for (int n = 1; n <= 2; ++n) {
    for (const auto& f : builtin_catalog(n)) {
      Point p{0.21, {}};
      for (int i = 0; i < n; ++i) p.x.push_back(0.37 - 0.2 * i);
      const Taylor j = f.jet(p, 2);
      const double h = 1e-4;
      for (int v = 0; v <= n; ++v) {
        Point a = p, b = p;
        if (v == 0) {
          a.t += h;
          b.t -= h;
        } else {
          a.x[static_cast<std::size_t>(v - 1)] += h;
          b.x[static_cast<std::size_t>(v - 1)] -= h;
        }
        const double fd1 = (f.value(a) - f.value(b)) / (2 * h);
        const double fd2 = (f.value(a) - 2 * f.value(p) + f.value(b)) / (h * h);
        INFO(f.label(), " var ", v);
        CHECK(std::abs(fd1 - j.d1(v)) <= 1e-6 * std::max(1.0, std::abs(j.d1(v))));
        CHECK(std::abs(fd2 - j.d2(v, v)) <= 1e-6 * std::max(1.0, std::abs(j.d2(v, v))) * 1e2);
      }
    }
  }
}

TEST_CASE("profiles and terms") {
  const AnalyticFn bump(1, {SeparableTerm{1.0, {Profile::one(), Profile::bump(0.0, 0.2, 4)}}});
  CHECK(bump.value(0.0, std::vector<double>{0.1}) == doctest::Approx(std::pow(1 - 0.25, 4)));
  CHECK(bump.value(0.0, std::vector<double>{0.25}) == 0.0);
  CHECK(bump.max_order() == 3);
  CHECK_THROWS_AS(bump.jet(Point{0.0, {0.1}}, 4), CapabilityError);

  const AnalyticFn radial(2, {RadialTerm{1.0, {0.0, 0.0}, Profile::power(1.0)}});
  CHECK(radial.value(0.0, std::vector<double>{3.0, 4.0}) == doctest::Approx(5.0));
  CHECK_THROWS_AS(radial.jet(Point{0.0, {0.0, 0.0}}, 2), RangeError);
  const Jet2 j = radial.jet2(Point{0.0, {2.0, 0.0}});
  CHECK(j.grad_x[0] == doctest::Approx(1.0));
  CHECK(j.hess_xx(1, 1) == doctest::Approx(0.5));
  CHECK(j.hess_xx(0, 0) == doctest::Approx(0.0));

  // exp(z^T Q z / 2 + b.z + c) with Q = diag(2, -2): value at (1, 1) is 1
  const AnalyticFn eq(1, {ExpQuadTerm{1.0, {2.0, 0.0, 0.0, -2.0}, {0.0, 0.0}, 0.0}});
  CHECK(eq.value(1.0, std::vector<double>{1.0}) == doctest::Approx(1.0));
  CHECK(eq.is_time_independent() == false);
  CHECK(AnalyticFn::coordinate(2, 2).value(0.0, std::vector<double>{1.0, 7.0}) == 7.0);
}

TEST_CASE("make_grid examples") {
  const std::vector<Bounds> b1{{-1.0, 1.0}};
  const Grid g = make_grid(b1, 0.01, 0.005, 1.0);
  CHECK(g.node_count() == 201);
  CHECK(g.steps == 200);
  CHECK_THROWS_AS(make_grid(b1, 0.01, 0.02, 1.0), ConfigError);
  const std::vector<Bounds> b2{{0.0, 1.0}, {0.0, 1.0}};
  const Grid g2 = make_grid(b2, 0.05, 0.02, 1.0, 1.0 / std::sqrt(2.0));
  CHECK(g2.node_count() == 21 * 21);
  CHECK_THROWS_AS(make_grid(b2, 0.05, 0.04, 1.0), ConfigError);
  CHECK_THROWS_AS(make_grid(b1, 0.03, 0.01, 1.0), ConfigError);   // 2/0.03 cells is not whole
  CHECK_THROWS_AS(make_grid(b1, 0.01, 0.003, 1.0), ConfigError);  // 1/0.003 steps is not whole
  try {
    (void)make_grid(b2, 0.05, 0.04, 1.0);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("axis") != std::string::npos);
  }
  for (std::size_t i = 0; i < g2.node_count(); i += 37) CHECK(g2.flatten(g2.unflatten(i)) == i);
}

TEST_CASE("fd_apply examples") {
  const std::vector<Bounds> b{{-1.0, 1.0}};
  const Grid g = make_grid(b, 0.01, 0.005, 1.0);
  const Field sq = Field::sample(g, AnalyticFn(1, {SeparableTerm{1.0, {Profile::one(), Profile::poly({0, 0, 1})}}}), 0.0);
  for (std::size_t i = 1; i + 1 < g.node_count(); i += 17) CHECK(fd_apply(sq, Stencil::Laplacian, i) == doctest::Approx(2.0).epsilon(1e-9));
  const Field s = Field::sample(g, AnalyticFn(1, {SeparableTerm{1.0, {Profile::one(), Profile::sin(std::numbers::pi)}}}), 0.0);
  const std::size_t mid = 150;  // x = 0.5
  CHECK(g.position(mid)[0] == doctest::Approx(0.5));
  const double err = std::abs(fd_apply(s, Stencil::Laplacian, mid) + std::numbers::pi * std::numbers::pi);
  CHECK(err <= std::pow(std::numbers::pi, 4) / 12.0 * 0.01 * 0.01 * 1.01);
  const Field c(g, 3.0);
  CHECK(fd_apply(c, Stencil::Gradient, 10) == 0.0);
  CHECK_THROWS_AS(fd_apply(c, Stencil::Laplacian, 0), StencilError);
  const Field a(g, 1.0), m(g, 2.0), z(g, 5.0);
  CHECK(fd_time_second(a, m, z, 0.5, 3) == doctest::Approx((5.0 - 4.0 + 1.0) / 0.25));
}

TEST_CASE("philox known-answer vectors") {
  // Reference outputs of Philox4x32-10 published with the Random123 library.
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == PhiloxBlock{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        PhiloxBlock{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        PhiloxBlock{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("random streams are reproducible and roughly normal") {
  RandomStream a(42, 3), b(42, 3), c(42, 4);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(RandomStream(42, 3).next_u64() != c.next_u64());
  RandomStream r(7);
  double s = 0, s2 = 0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / m) < 5.0 / std::sqrt(m));
  CHECK(std::abs(s2 / m - 1.0) < 5.0 * std::sqrt(2.0 / m));
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u > 0 && u < 1));
  }
}

TEST_CASE("sample_brownian") {
  const auto p = sample_brownian(11, 0.001, 1.0);
  CHECK(p.steps() == 1000);
  CHECK(p.quadratic_variation() == doctest::Approx(1.0).epsilon(0.15));
  const auto q = sample_brownian(11, 0.001, 1.0);
  CHECK(p.increments == q.increments);
  CHECK(sample_brownian(11, 0.001, 1.0, 1).increments != p.increments);
  CHECK_THROWS_AS(sample_brownian(11, 0.3, 1.0), ConfigError);
}

TEST_CASE("jacobi eigenvalues") {
  SymMatrix m(3);
  m.set(0, 0, 2);
  m.set(1, 1, 2);
  m.set(2, 2, 2);
  m.set(0, 1, -1);
  m.set(1, 2, -1);
  const auto e = eigenvalues(m);
  // Tridiagonal (−1, 2, −1): 2 − 2 cos(k pi / 4)
  CHECK(e[0] == doctest::Approx(2 - std::sqrt(2.0)).epsilon(1e-13));
  CHECK(e[1] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(e[2] == doctest::Approx(2 + std::sqrt(2.0)).epsilon(1e-13));
  CHECK(m(1, 0) == m(0, 1));
  const std::vector<double> y{1.0, 1.0, 1.0};
  CHECK(m.quadratic_form(y) == doctest::Approx(2.0));
}

TEST_CASE("polyfit recovers an exact cubic") {
  std::vector<double> x, y;
  for (int k = 0; k < 6; ++k) {
    const double l = 16.0 * std::pow(2.0, k);
    x.push_back(l);
    y.push_back(3.0 - 2.0 * l + 0.5 * l * l + 7.0 * l * l * l);
  }
  const auto c = polyfit(x, y, 3);
  CHECK(c[3] == doctest::Approx(7.0).epsilon(1e-10));
  CHECK(c[2] == doctest::Approx(0.5).epsilon(1e-6));
}
