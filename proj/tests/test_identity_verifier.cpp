#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "carleman/errors.hpp"
#include "carleman/identity.hpp"
#include "carleman/inequality.hpp"
#include "carleman/spde.hpp"
#include "carleman/weights.hpp"

using namespace carleman;
using namespace carleman::fields;
using namespace carleman::verify;

namespace {

AnalyticFn bump2(double r) {
  return AnalyticFn(1, {SeparableTerm{1.0, {Profile::bump(0.0, r, 4), Profile::bump(0.0, r, 4)}}});
}

// rho = t - x
AnalyticFn rho_tx() { return AnalyticFn::coordinate(1, 0) + AnalyticFn::coordinate(1, 1).scaled(-1.0); }

GapSetup t42_setup() {
  GapSetup s;
  s.preset = GapPreset::T42;
  s.rho = rho_tx();
  s.varrho = AnalyticFn::zero(1);
  s.params.x0 = {0.0};
  const auto ch = weights::choose_gamma_mu(s.rho, s.varrho, Point{0.0, {0.0}}, s.c0, s.c1);
  s.params.gamma = ch.gamma;
  s.params.mu = ch.mu;
  s.manufactured = bump2(0.05);
  s.region.t = {-0.06, 0.06};
  s.region.x = {{-0.06, 0.06}};
  s.region.h = 0.002;
  return s;
}

std::vector<spde::FieldPath> frozen_paths(int count, double b1, double b2, double lap, std::uint64_t seed) {
  const std::vector<Bounds> b{{-1.0, 1.0}};
  const Grid g = make_grid(b, 0.02, 0.001, 0.02);
  spde::Coefficients c;
  c.b1 = spde::ScalarFn::constant(b1);
  c.b2 = spde::ScalarFn::constant(b2);
  c.laplacian_scale = lap;
  const AnalyticFn u0(1, {SeparableTerm{1.0, {Profile::one(), Profile::bump(0.0, 0.5, 4)}}});
  const spde::WaveState init{Field::sample(g, u0, 0.0), Field(g, 0.0), 0.0};
  spde::SolveOptions opt;
  opt.record_diffusion = true;
  opt.check_support = false;
  std::vector<spde::FieldPath> out;
  for (int i = 0; i < count; ++i)
    out.push_back(spde::solve(init, c, g, sample_brownian(seed, g.dt, g.t_max, static_cast<std::uint64_t>(i)), opt));
  return out;
}

}  // namespace

TEST_CASE("identity residual vanishes for w = 0") {
  weights::WeightParams wp;
  wp.lambda = 3.0;
  wp.gamma = 2.0;
  wp.mu = 0.5;
  wp.x0 = {0.1};
  const IdentityReport r = identity_residual(AnalyticFn::zero(1), rho_tx(), AnalyticFn::constant(1, 0.3), wp,
                                             Point{0.2, {0.4}});
  CHECK(r.residual == 0.0);
  CHECK(r.lhs == 0.0);
  CHECK(r.rhs == 0.0);
  CHECK(r.pass);
}

// rho = t^2 + x^2 with mu = 0 has grad ell = ell_t = 0 at the origin; w = 1 leaves only
// the time-density bookkeeping.
TEST_CASE("identity with a critical point of the weight") {
  const AnalyticFn rho(1, {SeparableTerm{1.0, {Profile::poly({0, 0, 1}), Profile::one()}},
                           SeparableTerm{1.0, {Profile::one(), Profile::poly({0, 0, 1})}}});
  weights::WeightParams wp;
  wp.lambda = 2.0;
  wp.x0 = {0.0};
  const IdentityReport r = identity_residual(AnalyticFn::constant(1, 1.0), rho, AnalyticFn::constant(1, 0.5), wp,
                                             Point{0.0, {0.0}});
  CHECK(std::abs(r.residual) <= 1e-9 * std::max({1.0, std::abs(r.lhs), std::abs(r.rhs)}));
}

TEST_CASE("identity holds on 200 random cases") {
  RandomStream rng(1);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    RandomStream cs(1, static_cast<std::uint64_t>(i));
    const IdentityCase c = random_identity_case(cs, 1 + i % 2);
    CHECK(c.params.gamma >= 1.0);
    CHECK(c.params.gamma <= 4.0);
    CHECK(std::abs(c.params.lambda * weights::eval_frame(c.rho, c.point, c.params, c.varrho).phi.value()) <= 20.0);
    const IdentityReport r = identity_residual(c.w, c.rho, c.varrho, c.params, c.point);
    worst = std::max(worst, std::abs(r.residual) / std::max({1.0, std::abs(r.lhs), std::abs(r.rhs)}));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("conjugation and cutoff identities") {
  weights::WeightParams wp;
  wp.lambda = 2.0;
  wp.gamma = 1.0;
  wp.mu = 0.0;
  wp.x0 = {0.0};
  const AnalyticFn u = builtin_catalog(1).front();
  CutoffSpec cut;
  cut.c2 = 0.5;
  cut.eps = 0.1;
  // phi = e^{t - x}; chi = 0 where phi <= c2, chi = 1 where phi >= c2 + eps.
  SUBCASE("chi = 0") {
    const Point p{0.0, {1.5}};
    const auto [conj, cutoff] = conjugation_residual(u, rho_tx(), wp, cut, p);
    CHECK(cutoff.lhs == 0.0);
    CHECK(cutoff.rhs == 0.0);
    CHECK(conj.pass);
  }
  SUBCASE("chi = 1") {
    const Point p{0.0, {-1.0}};
    const auto [conj, cutoff] = conjugation_residual(u, rho_tx(), wp, cut, p);
    CHECK(cutoff.residual == 0.0);
    CHECK(conj.pass);
  }
  SUBCASE("random transition band") {
    RandomStream rng(5);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const ConjugationCase c = random_conjugation_case(rng, 1 + i % 2);
      const double phi = weights::eval_frame(c.rho, c.point, c.params).phi.value();
      CHECK(phi > c.cutoff.c2);
      CHECK(phi < c.cutoff.c2 + c.cutoff.eps);
      const auto [a, b] = conjugation_residual(c.u, c.rho, c.params, c.cutoff, c.point);
      worst = std::max({worst, std::abs(a.residual) / std::max({1.0, std::abs(a.lhs), std::abs(a.rhs)}),
                        std::abs(b.residual) / std::max({1.0, std::abs(b.lhs), std::abs(b.rhs)})});
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("cutoff profile") {
  CutoffSpec c{0.5, 0.2};
  CHECK(c.profile(0.4)[0] == 0.0);
  CHECK(c.profile(0.8)[0] == 1.0);
  CHECK(c.profile(0.6)[0] == doctest::Approx(0.5));
  CHECK(c.profile(0.6)[1] == doctest::Approx(c.max_first()));
  CHECK_THROWS_AS((CutoffSpec{1.5, 0.1}.validate()), PreconditionError);
}

TEST_CASE("quadratic variation without noise is zero") {
  const auto paths = frozen_paths(100, 0.0, 0.0, 0.0, 3);
  const QvReport q = qv_check(paths, AnalyticFn::zero(1));
  CHECK(q.realized_mean == 0.0);
  CHECK(q.model_mean == 0.0);
  CHECK(q.report.pass);
}

// b1 = 0, b2 = 1 and no Laplacian: u stays within O(dt) of u0, so the expected
// realized sum is close to the integral of u0^2 over space and time.
TEST_CASE("frozen-coefficient oracle") {
  const auto paths = frozen_paths(200, 0.0, 1.0, 0.0, 4);
  const QvReport q = qv_check(paths, AnalyticFn::zero(1), 0.1);
  const Grid& g = paths.front().snapshots.front().u.grid();
  const auto& u0 = paths.front().snapshots.front().u;
  double oracle = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i)
    if (g.boundary_distance(i) >= 1) oracle += spde::node_weight(g, i) * u0[i] * u0[i];
  oracle *= g.t_max;
  CHECK(q.realized_mean == doctest::Approx(oracle).epsilon(0.1));
  CHECK(q.report.pass);
}

TEST_CASE("doubling the path count shrinks the standard error by about sqrt 2") {
  const auto paths = frozen_paths(800, 0.5, 1.0, 1.0, 9);
  const std::span<const spde::FieldPath> all(paths);
  const QvReport half = qv_check(all.first(400), AnalyticFn::zero(1));
  const QvReport full = qv_check(all, AnalyticFn::zero(1));
  const double ratio = half.realized_stderr / full.realized_stderr;
  CHECK(ratio >= 1.2);
  CHECK(ratio <= 1.8);
}

TEST_CASE("too few paths") {
  const auto paths = frozen_paths(10, 0.5, 1.0, 1.0, 2);
  CHECK_THROWS_AS(qv_check(paths, AnalyticFn::zero(1)), StatisticsError);
}

TEST_CASE("inequality gap of the zero function") {
  GapSetup s = t42_setup();
  s.manufactured = AnalyticFn::zero(1);
  for (const auto& row : inequality_gap(s, {8, 16, 32, 64})) CHECK(row.gap == 0.0);
}

// Scaling by 2 is exact in binary floating point; other factors agree up to rounding of the two sides.
TEST_CASE("inequality gaps are quadratic in v") {
  for (GapPreset p : {GapPreset::T32, GapPreset::T42, GapPreset::T51, GapPreset::T62}) {
    GapSetup s = t42_setup();
    s.preset = p;
    if (p == GapPreset::T62) s.c3 = 4097.0;
    GapSetup s2 = s, s3 = s;
    s2.manufactured = s.manufactured.scaled(2.0);
    s3.manufactured = s.manufactured.scaled(3.0);
    const auto a = inequality_gap(s, {8, 16});
    const auto b = inequality_gap(s2, {8, 16});
    const auto c = inequality_gap(s3, {8, 16});
    for (std::size_t i = 0; i < a.size(); ++i) {
      INFO(to_string(p));
      CHECK(b[i].gap == 4.0 * a[i].gap);
      CHECK(std::abs(c[i].gap - 9.0 * a[i].gap) <= 1e-12 * std::max(std::abs(c[i].lhs), std::abs(c[i].rhs)));
    }
  }
}

TEST_CASE("T4.2 gap is non-negative and nondecreasing") {
  const auto rows = inequality_gap(t42_setup(), {8, 16, 32, 64});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].gap >= 0.0);
    if (i > 0) CHECK(rows[i].gap >= rows[i - 1].gap);
  }
}

TEST_CASE("support touching the region edge") {
  GapSetup s = t42_setup();
  s.region.x = {{-0.04, 0.04}};
  CHECK_THROWS_AS(inequality_gap(s, {8}), SupportError);
}

// The exact right side and its expansion differ by terms of lower order in lambda.
TEST_CASE("T3.2 remainder is of lower order than lambda^3") {
  GapSetup s = t42_setup();
  s.preset = GapPreset::T32;
  s.params.gamma = 1.0;
  s.params.mu = 0.1;
  s.varrho = AnalyticFn::constant(1, 0.5);
  const auto rows = inequality_gap(s, {4, 8, 16, 32, 64});
  std::vector<double> scaled;
  for (const auto& r : rows) scaled.push_back(std::abs(r.gap) / std::pow(r.lambda, 3));
  for (std::size_t i = 1; i < scaled.size(); ++i) CHECK(scaled[i] < scaled[i - 1]);
  CHECK(scaled.back() < scaled.front() / 4.0);
}
