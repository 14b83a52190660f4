#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "carleman/errors.hpp"
#include "carleman/propagation.hpp"

using namespace carleman;
using namespace carleman::fields;
using namespace carleman::propagation;

namespace {

SupportSet ball1(double c, double r) { return SupportSet(1, {Ball{{c}, r}}, {}); }

AnalyticFn bump_x(double c, double r) {
  return AnalyticFn(1, {SeparableTerm{1.0, {Profile::one(), Profile::bump(c, r, 4)}}});
}

PropagationConfig bump_config(int paths, double b1) {
  PropagationConfig cfg;
  const std::vector<Bounds> b{{-1.0, 1.0}};
  cfg.grid = make_grid(b, 0.005, 0.0025, 0.5);
  cfg.coeffs.b1 = spde::ScalarFn::constant(b1);
  cfg.init = {Field::sample(cfg.grid, bump_x(0.0, 0.2), 0.0), Field(cfg.grid), 0.0};
  cfg.support = ball1(0.0, 0.2);
  cfg.paths = paths;
  cfg.seed = 8;
  cfg.stride = 10;
  return cfg;
}

}  // namespace

TEST_CASE("distance to a support set") {
  const SupportSet k = ball1(0.0, 0.2);
  const std::vector<double> in{0.1}, out{0.5};
  CHECK(distance_to_set(in, k) == 0.0);
  CHECK(distance_to_set(out, k) == doctest::Approx(0.3));

  const SupportSet two(2, {Ball{{0.0, 0.0}, 1.0}}, {Box{{3.0, -1.0}, {4.0, 1.0}}});
  const std::vector<double> p{2.5, 0.0}, q{5.0, 3.0};
  CHECK(distance_to_set(p, two) == doctest::Approx(0.5));
  CHECK(distance_to_set(q, two) == doctest::Approx(std::sqrt(1.0 + 4.0)));
  CHECK_THROWS_AS(SupportSet(1, {}, {}), InputError);
  CHECK_THROWS_AS(SupportSet(1, {Ball{{0.0}, -1.0}}, {}), InputError);
}

TEST_CASE("distance is 1-Lipschitz and inflated sets are nested") {
  const SupportSet k(2, {Ball{{0.3, -0.2}, 0.4}, Ball{{-1.0, 1.0}, 0.1}}, {Box{{0.5, 0.5}, {1.5, 0.8}}});
  RandomStream rng(12);
  for (int i = 0; i < 10000; ++i) {
    const std::vector<double> x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const std::vector<double> y{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const double d = std::hypot(x[0] - y[0], x[1] - y[1]);
    REQUIRE(std::abs(distance_to_set(x, k) - distance_to_set(y, k)) <= d * (1 + 1e-12));
    const double r = rng.uniform(0, 1), s = r + rng.uniform(0, 1);
    if (k.contains(x, r)) REQUIRE(k.contains(x, s));
  }
}

TEST_CASE("mollifier") {
  CHECK(mollifier(-1.0) == 0.0);
  CHECK(mollifier(0.0) == 0.0);
  CHECK(mollifier(1.0) == 0.5);
  CHECK(mollifier(3.0) == doctest::Approx(0.9));
  for (double s = 0.0; s < 5.0; s += 0.01) CHECK(mollifier(s + 0.01) >= mollifier(s));
}

TEST_CASE("local energy examples") {
  const std::vector<Bounds> b{{-2.0, 2.0}};
  const Grid g = make_grid(b, 0.1, 0.05, 1.0);
  const SupportSet k = ball1(0.0, 0.2);
  CHECK(local_energy(spde::WaveState{Field(g), Field(g), 0.0}, k, 0.0) == 0.0);

  spde::WaveState inside{Field(g), Field(g), 0.0};
  for (std::size_t i = 0; i < g.node_count(); ++i)
    if (std::abs(g.position(i)[0]) <= 0.5) inside.ut[i] = 1.0;
  CHECK(local_energy(inside, k, 0.3) == 0.0);
  CHECK(local_energy(inside, k, 0.0) > 0.0);

  // One node at x = 1.5: d_K - t = 1.3 - 0.3 = 1.
  spde::WaveState one{Field(g), Field(g), 0.0};
  const std::size_t at = 35;
  REQUIRE(g.position(at)[0] == doctest::Approx(1.5));
  one.ut[at] = 2.0;
  CHECK(local_energy(one, k, 0.3) == doctest::Approx(mollifier(1.0) * 0.5 * g.dx * 4.0));
  CHECK(energy_outside(one, k, 1.2) == doctest::Approx(0.5 * g.dx * 4.0));
  CHECK(energy_outside(one, k, 1.4) == 0.0);
}

TEST_CASE("zero data gives a zero trace") {
  PropagationConfig cfg = bump_config(4, 0.5);
  cfg.init = {Field(cfg.grid), Field(cfg.grid), 0.0};
  const EnergyTrace tr = run_propagation(cfg);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    CHECK(tr.mean[k] == 0.0);
    CHECK(tr.outside_mean[k] == 0.0);
    CHECK(tr.total_mean[k] == 0.0);
  }
  CHECK(tr.gronwall_c == 0.0);
}

// d'Alembert: the bump in |x| <= 0.2 reaches at most |x| <= 0.7 by t = 0.5.
TEST_CASE("deterministic free wave stays in the light cone") {
  PropagationConfig cfg = bump_config(1, 0.0);
  const spde::FieldPath fp =
      spde::solve(cfg.init, cfg.coeffs, cfg.grid, sample_brownian(1, cfg.grid.dt, cfg.grid.t_max));
  const auto& last = fp.snapshots.back();
  const double total = spde::total_energy(last);
  CHECK(energy_outside(last, ball1(0.0, 0.0), 0.75) <= 1e-8 * total);
}

TEST_CASE("noisy paths keep their energy inside the inflated support") {
  const PropagationConfig cfg = bump_config(40, 0.5);
  const EnergyTrace tr = run_propagation(cfg);
  CHECK(tr.paths == 40);
  CHECK(tr.times.back() == doctest::Approx(0.5));
  for (double e : tr.outside_mean) CHECK(e <= 1e-6 * tr.initial_total);
  CHECK(tr.gronwall_c > 0.0);
  CHECK(std::isfinite(tr.gronwall_c));
}

TEST_CASE("results do not depend on the worker count") {
  PropagationConfig cfg = bump_config(12, 0.5);
  cfg.threads = 1;
  const EnergyTrace a = run_propagation(cfg);
  cfg.threads = 4;
  const EnergyTrace b = run_propagation(cfg);
  CHECK(a.mean == b.mean);
  CHECK(a.stderr_ == b.stderr_);
  CHECK(a.outside_mean == b.outside_mean);
  CHECK(a.total_mean == b.total_mean);
  CHECK(a.gronwall_c == b.gronwall_c);
}

TEST_CASE("initial data outside K is rejected") {
  PropagationConfig cfg = bump_config(2, 0.5);
  cfg.support = ball1(0.0, 0.1);
  CHECK_THROWS_AS(run_propagation(cfg), InputError);
}
