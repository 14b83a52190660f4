#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "carleman/errors.hpp"
#include "carleman/spde.hpp"

using namespace carleman;
using namespace carleman::fields;
using namespace carleman::spde;

namespace {

Grid line_grid(double lo, double hi, double dx, double dt, double t_max) {
  const std::vector<Bounds> b{{lo, hi}};
  return make_grid(b, dx, dt, t_max);
}

AnalyticFn bump_x(double c, double r) {
  return AnalyticFn(1, {SeparableTerm{1.0, {Profile::one(), Profile::bump(c, r, 4)}}});
}

// sin(pi (x - t)) solves the free wave equation.
AnalyticFn plane_wave() {
  return AnalyticFn(1, {RidgeTerm{1.0, {-std::numbers::pi, std::numbers::pi}, 0.0, Profile::sin(1.0)}});
}

BrownianPath quiet_path(const Grid& g) { return sample_brownian(1, g.dt, g.t_max); }

double mms_error(double dx) {
  const Grid g = line_grid(-1.0, 1.0, dx, 0.5 * dx, 0.5);
  const AnalyticFn ue = plane_wave();
  Coefficients c;
  c.source = manufactured_forcing(ue, c);
  SolveOptions opt;
  opt.check_support = false;
  opt.boundary_u = ScalarFn(ue);
  const FieldPath fp = solve(exact_state(ue, g, 0.0, true), c, g, quiet_path(g), opt);
  const WaveState exact = exact_state(ue, g, g.t_max);
  return l2_distance(fp.snapshots.back().u, exact.u);
}

// Independent three-level reference: u^{k+1} = 2u^k - u^{k-1} + dt^2 Lap u^k with u^{-1} = u^0 - dt u_t^0.
std::vector<double> leapfrog(const std::vector<double>& u0, const std::vector<double>& ut0, double dx, double dt,
                             int steps) {
  const std::size_t m = u0.size();
  std::vector<double> prev(m), cur = u0, next(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) prev[i] = u0[i] - dt * ut0[i];
  const double r = dt * dt / (dx * dx);
  for (int k = 0; k < steps; ++k) {
    for (std::size_t i = 1; i + 1 < m; ++i) next[i] = 2 * cur[i] - prev[i] + r * (cur[i + 1] - 2 * cur[i] + cur[i - 1]);
    next[0] = next[m - 1] = 0.0;
    prev.swap(cur);
    cur.swap(next);
  }
  return cur;
}

}  // namespace

TEST_CASE("zero data stays zero") {
  const Grid g = line_grid(-1, 1, 0.05, 0.025, 0.5);
  const FieldPath fp = solve(WaveState{Field(g), Field(g), 0.0}, Coefficients{}, g, quiet_path(g));
  for (const auto& s : fp.snapshots) {
    CHECK(s.u.max_abs() == 0.0);
    CHECK(s.ut.max_abs() == 0.0);
  }
  CHECK(fp.snapshots.size() == static_cast<std::size_t>(g.steps + 1));
}

TEST_CASE("manufactured forcing") {
  const AnalyticFn t2(1, {SeparableTerm{1.0, {Profile::poly({0, 0, 1}), Profile::one()}}});
  Coefficients c;
  c.a1 = ScalarFn::constant(0.5);
  c.a3 = ScalarFn::constant(-2.0);
  const ScalarFn g = manufactured_forcing(t2, c);
  const std::vector<double> x{0.3};
  for (double t : {0.0, 0.4, 1.7}) CHECK(g(t, x) == doctest::Approx(2 - 0.5 * 2 * t + 2.0 * t * t));
  CHECK(manufactured_forcing(plane_wave(), Coefficients{})(0.3, x) == doctest::Approx(0.0).scale(1.0));
  Coefficients c2 = c;
  c2.a3 = ScalarFn::constant(1.0);
  // Changing a3 by 3 shifts g by -3 u_exact.
  CHECK(manufactured_forcing(t2, c2)(0.4, x) - g(0.4, x) == doctest::Approx(-3.0 * 0.16));
}

TEST_CASE("manufactured plane wave converges at second order in space") {
  const double e1 = mms_error(0.02), e2 = mms_error(0.01), e3 = mms_error(0.005);
  const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
  INFO("errors ", e1, " ", e2, " ", e3);
  CHECK(p1 == doctest::Approx(2.0).epsilon(0.15));
  CHECK(p2 == doctest::Approx(2.0).epsilon(0.15));
}

// Without the half-step shift in u_t the start-up error is first order in dt.
TEST_CASE("temporal refinement of the unstaggered start") {
  const AnalyticFn ue = plane_wave();
  auto final_u = [&](double dt) {
    const Grid g = line_grid(-1.0, 1.0, 0.01, dt, 0.5);
    SolveOptions opt;
    opt.check_support = false;
    opt.boundary_u = ScalarFn(ue);
    return solve(exact_state(ue, g, 0.0), Coefficients{}, g, quiet_path(g), opt).snapshots.back().u;
  };
  const Field a = final_u(0.004), b = final_u(0.002), c = final_u(0.001);
  const double ratio = l2_distance(a, b) / l2_distance(b, c);
  CHECK(ratio > 1.4);
  CHECK(ratio < 2.6);
}

TEST_CASE("zero noise matches the leapfrog reference") {
  const Grid g = line_grid(-1, 1, 0.01, 0.005, 0.5);
  const WaveState init{Field::sample(g, bump_x(0.0, 0.2), 0.0), Field::sample(g, bump_x(0.1, 0.1), 0.0), 0.0};
  const FieldPath fp = solve(init, Coefficients{}, g, quiet_path(g));
  const auto ref = leapfrog(init.u.values(), init.ut.values(), g.dx, g.dt, g.steps);
  double err = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) err = std::max(err, std::abs(ref[i] - fp.snapshots.back().u[i]));
  CHECK(err <= 1e-10 * std::max(1.0, init.u.max_abs()));
}

// du_t = u_t dW with Euler steps: E[u_t(T)^2] = (1 + dt)^{T/dt}, close to e^T.
TEST_CASE("scalar multiplicative noise second moment") {
  const Grid g = line_grid(0, 1, 0.25, 0.01, 0.5);
  Coefficients c;
  c.b1 = ScalarFn::constant(1.0);
  c.laplacian_scale = 0.0;
  Field ut(g, 0.0);
  ut[2] = 1.0;
  const WaveState init{Field(g), ut, 0.0};
  SolveOptions opt;
  opt.check_support = false;
  opt.stride = g.steps;
  const int paths = 10000;
  double sum = 0.0;
  for (int i = 0; i < paths; ++i) {
    const FieldPath fp = solve(init, c, g, sample_brownian(21, g.dt, g.t_max, static_cast<std::uint64_t>(i)), opt);
    const double v = fp.snapshots.back().ut[2];
    sum += v * v;
  }
  CHECK(sum / paths == doctest::Approx(std::exp(g.t_max)).epsilon(0.1));
}

TEST_CASE("energy of a free wave is conserved") {
  // A right-moving pulse keeps each term of the energy constant, including the u^2 part.
  const Grid g = line_grid(-2, 2, 0.005, 0.0025, 1.0);
  const AnalyticFn pulse(1, {RidgeTerm{1.0, {-1.0, 1.0}, 0.0, Profile::bump(0.0, 0.3, 4)}});
  const WaveState init = exact_state(pulse, g, 0.0, true);
  SolveOptions opt;
  opt.stride = 40;
  const FieldPath fp = solve(init, Coefficients{}, g, quiet_path(g), opt);
  const double e0 = total_energy(fp.snapshots.front());
  double drift = 0.0;
  for (const auto& s : fp.snapshots) drift = std::max(drift, std::abs(total_energy(s) - e0) / e0);
  CHECK(drift <= 0.01);
}

TEST_CASE("total energy examples") {
  const Grid g = line_grid(0, 1, 0.1, 0.05, 0.5);
  CHECK(total_energy(WaveState{Field(g), Field(g), 0.0}) == 0.0);
  CHECK(total_energy(WaveState{Field(g), Field(g, 1.0), 0.0}) == doctest::Approx(0.5));
  CHECK(node_weight(g, 0) == doctest::Approx(0.05));
  CHECK(node_weight(g, 3) == doctest::Approx(0.1));
}

TEST_CASE("paths are deterministic and linear in the data") {
  const Grid g = line_grid(-1, 1, 0.01, 0.005, 0.3);
  Coefficients c;
  c.b1 = ScalarFn::constant(0.5);
  c.b2 = ScalarFn::constant(1.0);
  c.a3 = ScalarFn::constant(-0.5);
  const BrownianPath w = sample_brownian(3, g.dt, g.t_max);
  const WaveState a{Field::sample(g, bump_x(-0.2, 0.2), 0.0), Field(g), 0.0};
  const WaveState b{Field(g), Field::sample(g, bump_x(0.2, 0.15), 0.0), 0.0};
  WaveState ab{a.u, a.ut, 0.0};
  ab.u *= 2.0;
  Field bu = b.u, but = b.ut;
  bu *= -3.0;
  but *= -3.0;
  ab.u += bu;
  ab.ut += but;

  const FieldPath fa = solve(a, c, g, w), fb = solve(b, c, g, w), fab = solve(ab, c, g, w);
  CHECK(solve(a, c, g, w).snapshots.back().u.values() == fa.snapshots.back().u.values());
  const Field& ua = fa.snapshots.back().u;
  const Field& ub = fb.snapshots.back().u;
  const Field& uab = fab.snapshots.back().u;
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < ua.size(); ++i) {
    err = std::max(err, std::abs(uab[i] - (2.0 * ua[i] - 3.0 * ub[i])));
    scale = std::max(scale, std::abs(uab[i]));
  }
  CHECK(err <= 1e-10 * scale);
}

TEST_CASE("solver guards") {
  const Grid g = line_grid(-1, 1, 0.01, 0.005, 0.5);
  Coefficients loud;
  loud.b1 = ScalarFn::constant(10.0);
  const WaveState init{Field::sample(g, bump_x(0.0, 0.2), 0.0), Field(g), 0.0};
  CHECK_THROWS_AS(solve(init, loud, g, quiet_path(g)), ConfigError);  // dt > 0.1 / |b1|^2

  const WaveState wide{Field::sample(g, bump_x(0.0, 0.8), 0.0), Field(g), 0.0};
  CHECK_THROWS_AS(solve(wide, Coefficients{}, g, quiet_path(g)), PropagationError);

  Coefficients growth;
  growth.a3 = ScalarFn::constant(1e300);
  SolveOptions opt;
  opt.check_support = false;
  CHECK_THROWS_AS(solve(init, growth, g, quiet_path(g), opt), BlowUpError);

  const Grid other = line_grid(-1, 1, 0.01, 0.0025, 0.5);
  CHECK_THROWS_AS(solve(init, Coefficients{}, g, quiet_path(other)), PreconditionError);
}
