#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "carleman/cone.hpp"
#include "carleman/errors.hpp"
#include "carleman/identity.hpp"
#include "carleman/inequality.hpp"
#include "carleman/lab.hpp"
#include "carleman/linalg.hpp"
#include "carleman/parallel.hpp"
#include "carleman/weights.hpp"

namespace carleman::lab {
namespace {

using fields::AnalyticFn;
using fields::Point;

double flag(bool b) { return b ? 1.0 : 0.0; }

std::uint64_t seed_of(Reader& r, const Overrides& o, std::uint64_t fallback = 1) {
  const std::uint64_t s = r.u64("seed", fallback);
  return o.seed.value_or(s);
}

int paths_of(Reader& r, const Overrides& o, int fallback) {
  const int p = r.integer("paths", fallback);
  const int v = o.paths.value_or(p);
  if (v < 1) throw ConfigError("paths must be positive");
  return v;
}

std::vector<int> dims_of(Reader& r) {
  std::vector<int> out;
  for (double d : r.numbers("dims", std::vector<double>{1, 2})) {
    if (d != 1 && d != 2) throw ConfigError("dims: entries must be 1 or 2");
    out.push_back(static_cast<int>(d));
  }
  if (out.empty()) throw ConfigError("dims: empty");
  return out;
}

int count_of(Reader& r, const std::string& key, int fallback) {
  const int v = r.integer(key, fallback);
  if (v < 1) throw ConfigError(key + " must be positive");
  return v;
}

void check(Outcome& out, std::string name, bool pass, std::string detail) {
  out.assertions.push_back({std::move(name), pass, std::move(detail)});
}

std::string num(double v) { return format_double(v); }

double rel(double residual, double lhs, double rhs) {
  return std::abs(residual) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

// Identities

Outcome identity_check(Reader& r, const Overrides& o) {
  const int cases = count_of(r, "cases", 200);
  const auto dims = dims_of(r);
  const double tol = r.number("tol", 1e-8);
  const double max_lphi = r.number("max_lphi", 20.0);
  const std::uint64_t seed = seed_of(r, o);
  r.finish();

  Outcome out;
  out.table.columns = {"case", "n", "lambda", "gamma", "mu", "lhs", "rhs", "residual", "rel_residual", "pass"};
  double worst = 0.0;
  int failed = 0;
  for (int i = 0; i < cases; ++i) {
    fields::RandomStream rng(seed, static_cast<std::uint64_t>(i));
    const int n = dims[static_cast<std::size_t>(i) % dims.size()];
    const auto c = verify::random_identity_case(rng, n, max_lphi);
    const auto rep = verify::identity_residual(c.w, c.rho, c.varrho, c.params, c.point, tol);
    const double rr = rel(rep.residual, rep.lhs, rep.rhs);
    worst = std::max(worst, rr);
    failed += rep.pass ? 0 : 1;
    out.table.add({double(i), double(n), c.params.lambda, c.params.gamma, c.params.mu, rep.lhs, rep.rhs, rep.residual,
                   rr, flag(rep.pass)});
  }
  check(out, "pointwise identity", failed == 0,
        std::to_string(cases - failed) + "/" + std::to_string(cases) + " within " + num(tol) +
            ", max relative residual " + num(worst));
  return out;
}

Outcome conjugation_check(Reader& r, const Overrides& o) {
  const int cases = count_of(r, "cases", 100);
  const auto dims = dims_of(r);
  const double tol = r.number("tol", 1e-8);
  const double max_lphi = r.number("max_lphi", 20.0);
  const std::uint64_t seed = seed_of(r, o);
  r.finish();

  Outcome out;
  out.table.columns = {"case", "n", "identity", "lambda", "eps", "c2", "chi", "lhs", "rhs", "rel_residual", "pass"};
  double worst = 0.0;
  int failed = 0, off_band = 0;
  for (int i = 0; i < cases; ++i) {
    fields::RandomStream rng(seed, static_cast<std::uint64_t>(i));
    const int n = dims[static_cast<std::size_t>(i) % dims.size()];
    const auto c = verify::random_conjugation_case(rng, n, max_lphi);
    const auto [conj, cut] = verify::conjugation_residual(c.u, c.rho, c.params, c.cutoff, c.point, tol);
    const double phi = weights::eval_frame(c.rho, c.point, c.params).phi.value();
    const double chi = c.cutoff.profile(phi)[0];
    if (!(chi > 0 && chi < 1)) ++off_band;
    for (const auto* rep : {&conj, &cut}) {
      const double rr = rel(rep->residual, rep->lhs, rep->rhs);
      worst = std::max(worst, rr);
      failed += rep->pass ? 0 : 1;
      out.table.add({double(i), double(n), rep->name, c.params.lambda, c.cutoff.eps, c.cutoff.c2, chi, rep->lhs,
                     rep->rhs, rr, flag(rep->pass)});
    }
  }
  check(out, "conjugation and cutoff identities", failed == 0,
        std::to_string(2 * cases - failed) + "/" + std::to_string(2 * cases) + " within " + num(tol) +
            ", max relative residual " + num(worst));
  check(out, "points in the cutoff transition band", off_band == 0,
        std::to_string(cases - off_band) + "/" + std::to_string(cases) + " with 0 < chi < 1");
  return out;
}

Outcome expansion_check(Reader& r, const Overrides& o) {
  const int points = count_of(r, "points", 50);
  const auto dims = dims_of(r);
  const double lambda_max = r.number("lambda_max", 128.0);
  const int levels = count_of(r, "levels", 6);
  const double tol_a = r.number("tol_A", 1e-6);
  const double tol_b = r.number("tol_B", 1e-5);
  const std::uint64_t seed = seed_of(r, o);
  r.finish();
  if (levels < 4) throw ConfigError("levels must be at least 4 (a cubic fit needs four lambdas)");

  Outcome out;
  out.table.columns = {"point", "n", "quantity", "lambda_min", "lambda_max", "fitted", "predicted", "rel_err", "pass"};
  double worst_a = 0.0, worst_b = 0.0;
  int failed = 0;
  for (int i = 0; i < points; ++i) {
    fields::RandomStream rng(seed, static_cast<std::uint64_t>(i));
    const int n = dims[static_cast<std::size_t>(i) % dims.size()];
    auto c = verify::random_identity_case(rng, n);
    const double phi = weights::eval_frame(c.rho, c.point, c.params, c.varrho).phi.value();
    const double top = std::min(lambda_max, 600.0 / std::max(std::abs(phi), 1e-12));
    std::vector<double> lam, A, B;
    weights::DQuantities pred;
    for (int k = 0; k < levels; ++k) {
      c.params.lambda = top / std::pow(2.0, k);
      const auto d = weights::eval_D(weights::eval_frame(c.rho, c.point, c.params, c.varrho));
      lam.push_back(c.params.lambda);
      A.push_back(d.A);
      B.push_back(d.B);
      pred = d;
    }
    auto scale = [&](const std::vector<double>& v, int power) {
      double s = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k) s = std::max(s, std::abs(v[k]) / std::pow(lam[k], power));
      return s;
    };
    const double fa = fields::polyfit(lam, A, 2)[2];
    const double fb = fields::polyfit(lam, B, 3)[3];
    const double ea = std::abs(fa - pred.A_leading()) / std::max({std::abs(pred.A_leading()), scale(A, 2), 1e-300});
    const double eb = std::abs(fb - pred.B_leading()) / std::max({std::abs(pred.B_leading()), scale(B, 3), 1e-300});
    worst_a = std::max(worst_a, ea);
    worst_b = std::max(worst_b, eb);
    failed += (ea <= tol_a ? 0 : 1) + (eb <= tol_b ? 0 : 1);
    out.table.add({double(i), double(n), "A", lam.back(), lam.front(), fa, pred.A_leading(), ea, flag(ea <= tol_a)});
    out.table.add({double(i), double(n), "B", lam.back(), lam.front(), fb, pred.B_leading(), eb, flag(eb <= tol_b)});
  }
  check(out, "A leading coefficient equals P + D1", worst_a <= tol_a, "max relative error " + num(worst_a));
  check(out, "B leading coefficient equals D2 + D3", worst_b <= tol_b, "max relative error " + num(worst_b));
  return out;
}

Outcome d2_check(Reader& r, const Overrides& o) {
  const int samples = count_of(r, "samples", 500);
  const auto dims = dims_of(r);
  const double tol = r.number("tol", 1e-9);
  const std::uint64_t seed = seed_of(r, o);
  r.finish();

  Outcome out;
  out.table.columns = {"sample", "n", "gamma", "D2_matrix", "D2_divergence", "term_scale", "rel_err", "pass"};
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    fields::RandomStream rng(seed, static_cast<std::uint64_t>(i));
    const int n = dims[static_cast<std::size_t>(i) % dims.size()];
    const auto c = verify::random_identity_case(rng, n);
    const auto d = weights::eval_D(weights::eval_frame(c.rho, c.point, c.params, c.varrho));
    const double e = std::abs(d.D2 - d.D2_div) / std::max(d.D2_scale, 1e-300);
    worst = std::max(worst, e);
    out.table.add({double(i), double(n), c.params.gamma, d.D2, d.D2_div, d.D2_scale, e, flag(e <= tol)});
  }
  check(out, "D2 matrix form equals divergence form", worst <= tol, "max relative error " + num(worst));
  return out;
}

// Weights

Outcome psd_check(Reader& r, const Overrides& o) {
  const auto x0 = r.numbers("x0", std::vector<double>{2.0, 0.0});
  const int n = static_cast<int>(x0.size());
  if (n < 1 || n > fields::kMaxSpaceDim) throw ConfigError("x0: 1 or 2 coordinates");
  AnalyticFn g = r.has("g") ? parse_function(r.raw("g"), n, "g")
                            : AnalyticFn(n, {fields::RadialTerm{1.0, std::vector<double>(x0.size(), 0.0),
                                                                fields::Profile::power(1.0)}});
  const int samples = count_of(r, "samples", 50);
  const double tol = r.number("tol", 1e-9);
  const auto probes = r.numbers("taus", std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0});
  const double expect = r.has("expect_tau") ? r.number("expect_tau") : NAN;
  const std::uint64_t seed = seed_of(r, o);
  r.finish();

  const auto cert = weights::psd_certificate(g, x0, seed, samples);
  const auto H = weights::spatial_hessian(g, x0);
  Outcome out;
  out.table.columns = {"kind", "tau", "min_eig", "accepted"};
  bool consistent = true;
  for (double tau : probes) {
    if (!(tau > 0)) throw ConfigError("taus: entries must be positive");
    const double m = weights::psd_min_eig(H, tau);
    const bool acc = weights::psd_accepts(H, tau);
    consistent = consistent && (acc == (m >= weights::kPsdMargin));
    out.table.add({"probe", tau, m, flag(acc)});
  }
  out.table.add({"certificate", cert.tau, cert.min_eig, flag(cert.min_eig >= weights::kPsdMargin)});
  out.table.add({"tangent", cert.tau, cert.tangent_min, flag(cert.tangent_min >= -tol)});
  for (std::size_t i = 0; i < cert.hess_eigs.size(); ++i) out.table.add({"hess_eig", double(i), cert.hess_eigs[i], 1.0});

  check(out, "acceptance iff min eigenvalue >= margin", consistent, "margin " + num(weights::kPsdMargin));
  check(out, "certified tau accepted", cert.min_eig >= weights::kPsdMargin,
        "tau " + num(cert.tau) + ", min eigenvalue " + num(cert.min_eig));
  const bool minimal = cert.tau == 1.0 || !weights::psd_accepts(H, cert.tau / 2);
  check(out, "certified tau minimal in the doubling search", minimal, "tau/2 = " + num(cert.tau / 2));
  check(out, "tangent quadratic form non-negative", cert.tangent_min >= -tol,
        "min over " + std::to_string(cert.tangent_samples) + " samples " + num(cert.tangent_min));
  if (!std::isnan(expect)) check(out, "certified tau matches expectation", cert.tau == expect, "expected " + num(expect));
  return out;
}

Outcome assumption_check(Reader& r, const Overrides& o) {
  const int n = r.integer("n", 1);
  if (n < 1 || n > fields::kMaxSpaceDim) throw ConfigError("n must be 1 or 2");
  const AnalyticFn rho = parse_function(r.raw("rho"), n, "rho");
  const AnalyticFn varrho = r.has("varrho") ? parse_function(r.raw("varrho"), n, "varrho") : AnalyticFn::zero(n);
  const auto preset = weights::parse_assumption_preset(r.string("preset", "A2.1"));
  const double c0 = r.number("c0", 1.0);
  const double c1 = r.number("c1", 1.0);
  const double b1 = r.number("b1_norm", 1.0);
  const bool expect = r.boolean("expect", true);
  const json& pts = r.raw("points");
  (void)seed_of(r, o);
  r.finish();
  if (!pts.is_array() || pts.empty()) throw ConfigError("points: expected a nonempty array of [t, x...]");

  Outcome out;
  out.table.columns = {"point", "t", "preset", "min_eig", "rho_t", "penalty", "matrix_ok", "rho_t_ok", "b1_ok", "pass"};
  int matched = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!pts[i].is_array() || pts[i].size() != static_cast<std::size_t>(n + 1))
      throw ConfigError("points[" + std::to_string(i) + "]: expected " + std::to_string(n + 1) + " numbers");
    Point p{pts[i][0].get<double>(), {}};
    for (int j = 1; j <= n; ++j) p.x.push_back(pts[i][static_cast<std::size_t>(j)].get<double>());
    const auto rep = weights::assumption_check(rho.jet2(p), varrho.value(p), preset, c0, c1, b1);
    matched += rep.pass() == expect ? 1 : 0;
    out.table.add({double(i), p.t, weights::to_string(preset), rep.min_eig, rep.rho_t, rep.penalty,
                   flag(rep.matrix_ok), flag(rep.rho_t_ok), flag(rep.b1_ok), flag(rep.pass())});
  }
  check(out, "assumption " + weights::to_string(preset) + (expect ? " holds" : " fails") + " at every point",
        matched == static_cast<int>(pts.size()), std::to_string(matched) + "/" + std::to_string(pts.size()));
  return out;
}

// Monte Carlo

struct Problem {
  fields::Grid grid;
  spde::Coefficients coeffs;
  spde::WaveState init;
};

Problem problem_of(Reader& r) {
  Problem p;
  p.grid = parse_grid(r.object("grid"));
  const int n = p.grid.n;
  p.coeffs = r.has("coefficients") ? parse_coefficients(r.object("coefficients"), n) : spde::Coefficients{};
  Reader init = r.object("init");
  const AnalyticFn u = parse_function(init.raw("u"), n, "init.u");
  const AnalyticFn ut = init.has("ut") ? parse_function(init.raw("ut"), n, "init.ut") : AnalyticFn::zero(n);
  init.finish();
  p.init = {fields::Field::sample(p.grid, u, 0.0), fields::Field::sample(p.grid, ut, 0.0), 0.0};
  return p;
}

std::vector<spde::FieldPath> solve_paths(const Problem& p, int paths, std::uint64_t seed, const spde::SolveOptions& opt,
                                         unsigned threads) {
  std::vector<spde::FieldPath> out(static_cast<std::size_t>(paths));
  parallel_for(
      out.size(),
      [&](std::size_t i) {
        out[i] = spde::solve(p.init, p.coeffs, p.grid, fields::sample_brownian(seed, p.grid.dt, p.grid.t_max, i), opt);
      },
      threads);
  return out;
}

Outcome qv_check(Reader& r, const Overrides& o) {
  Problem p;
  spde::SolveOptions opt;
  opt.record_diffusion = true;
  if (r.has("manufactured")) {
    // The drift is forced so that the noise-free part of the equation is solved by u_exact.
    p.grid = parse_grid(r.object("grid"));
    p.coeffs = r.has("coefficients") ? parse_coefficients(r.object("coefficients"), p.grid.n) : spde::Coefficients{};
    const AnalyticFn ue = parse_function(r.raw("manufactured"), p.grid.n, "manufactured");
    p.coeffs.source = spde::manufactured_forcing(ue, p.coeffs);
    p.init = spde::exact_state(ue, p.grid, 0.0, true);
    opt.boundary_u = spde::ScalarFn(ue);
    opt.check_support = false;
  } else {
    p = problem_of(r);
  }
  opt.check_support = r.boolean("check_support", opt.check_support);
  const int n = p.grid.n;
  const AnalyticFn log_theta = r.has("log_theta") ? parse_function(r.raw("log_theta"), n, "log_theta") : AnalyticFn::zero(n);
  const double tol = r.number("tol", 0.05);
  const int paths = paths_of(r, o, 200);
  const std::uint64_t seed = seed_of(r, o);
  r.finish();

  const auto fps = solve_paths(p, paths, seed, opt, o.threads);
  const auto q = verify::qv_check(fps, log_theta, tol);
  Outcome out;
  out.table.columns = {"quantity", "value"};
  out.table.add({"realized_mean", q.realized_mean});
  out.table.add({"realized_stderr", q.realized_stderr});
  out.table.add({"model_mean", q.model_mean});
  out.table.add({"ratio", q.report.lhs});
  out.table.add({"paths", double(q.paths)});
  check(out, "realized quadratic variation matches the model", q.report.pass,
        "ratio " + num(q.report.lhs) + " (tolerance " + num(tol) + ", stderr of realized mean " +
            num(q.realized_stderr) + ")");
  return out;
}

Outcome propagation_run(Reader& r, const Overrides& o) {
  const Problem p = problem_of(r);
  propagation::PropagationConfig cfg;
  cfg.grid = p.grid;
  cfg.coeffs = p.coeffs;
  cfg.init = p.init;
  cfg.support = parse_support(r.object("support"), p.grid.n);
  cfg.paths = paths_of(r, o, 200);
  cfg.seed = seed_of(r, o);
  cfg.stride = count_of(r, "stride", 1);
  cfg.halo_cells = r.integer("halo_cells", 3);
  cfg.threads = o.threads;
  const double tol = r.number("tol", 1e-6);
  r.finish();
  if (cfg.halo_cells < 0) throw ConfigError("halo_cells must be non-negative");

  const auto tr = propagation::run_propagation(cfg);
  Outcome out;
  out.table.columns = {"time", "local_energy", "local_energy_stderr", "outside_energy", "outside_stderr", "total_energy"};
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    out.table.add({tr.times[k], tr.mean[k], tr.stderr_[k], tr.outside_mean[k], tr.outside_stderr[k], tr.total_mean[k]});
    worst = std::max(worst, tr.outside_mean[k]);
  }
  out.log.push_back("empirical Gronwall constant " + num(tr.gronwall_c));
  out.log.push_back("initial total energy " + num(tr.initial_total));
  check(out, "energy outside the inflated support", worst <= tol * tr.initial_total,
        "max mean " + num(worst) + " vs " + num(tol) + " x initial " + num(tr.initial_total));
  return out;
}

Outcome ucp_decay(Reader& r, const Overrides& o) {
  const Problem p = problem_of(r);
  const int n = p.grid.n;
  const AnalyticFn rho = parse_function(r.raw("rho"), n, "rho");
  weights::WeightParams wp;
  wp.gamma = r.number("gamma", 1.0);
  wp.mu = r.number("mu", 0.0);
  wp.t0 = r.number("t0", 0.0);
  wp.x0 = r.numbers("x0", std::vector<double>(static_cast<std::size_t>(n), 0.0));
  wp.validate(n);
  auto lambdas = r.numbers("lambdas", std::vector<double>{1, 2, 4, 8, 16, 32});
  const int paths = paths_of(r, o, 20);
  const std::uint64_t seed = seed_of(r, o);
  spde::SolveOptions opt;
  opt.stride = count_of(r, "stride", 1);
  r.finish();
  std::sort(lambdas.begin(), lambdas.end());

  const fields::Grid& g = p.grid;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto x = g.position(i);
    if (rho.value(0.0, x) > 0 && (p.init.u[i] != 0.0 || p.init.ut[i] != 0.0))
      throw InputError("ucp-decay: initial data must vanish where rho > 0 (node " + std::to_string(i) + ")");
  }
  const auto fps = solve_paths(p, paths, seed, opt, o.threads);

  // Per snapshot and node: phi - 1 where rho <= 0 (else unused) and the path-mean energy density.
  const auto& snaps = fps.front().snapshots;
  const double dts = g.dt * opt.stride;
  std::vector<double> phi_shift, density, positive;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const double t = snaps[k].time;
    double pos = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      if (g.boundary_distance(i) < 1) continue;
      double e = 0.0;
      for (const auto& fp : fps) {
        const auto& s = fp.snapshots[k];
        double d = s.u[i] * s.u[i] + s.ut[i] * s.ut[i];
        for (int a = 0; a < n; ++a) {
          const double gr = fields::fd_apply(s.u, fields::Stencil::Gradient, i, a);
          d += gr * gr;
        }
        e += d;
      }
      e *= spde::node_weight(g, i) * dts / static_cast<double>(fps.size());
      const auto x = g.position(i);
      if (rho.value(t, x) > 0) {
        pos += e;
        continue;
      }
      Point pt{t, x};
      const double psi = std::exp(wp.gamma * rho.value(pt));
      double r2 = (t - wp.t0) * (t - wp.t0);
      for (int a = 0; a < n; ++a) r2 += (x[static_cast<std::size_t>(a)] - wp.x0[static_cast<std::size_t>(a)]) *
                                      (x[static_cast<std::size_t>(a)] - wp.x0[static_cast<std::size_t>(a)]);
      phi_shift.push_back(psi - wp.mu * r2 - 1.0);
      density.push_back(e);
    }
    positive.push_back(pos);
  }
  double pos_total = 0.0;
  for (double v : positive) pos_total += v;

  Outcome out;
  out.table.columns = {"lambda", "log_weighted_norm", "positive_region_energy"};
  bool monotone = true, finite = true;
  double prev = INFINITY;
  for (double lam : lambdas) {
    // log sum of e^{2 lam (phi - 1)} density, computed stably.
    double m = -INFINITY;
    for (std::size_t i = 0; i < density.size(); ++i)
      if (density[i] > 0) m = std::max(m, 2.0 * lam * phi_shift[i] + std::log(density[i]));
    double s = 0.0;
    for (std::size_t i = 0; i < density.size(); ++i)
      if (density[i] > 0) s += std::exp(2.0 * lam * phi_shift[i] + std::log(density[i]) - m);
    const double lw = density.empty() || !std::isfinite(m) ? -INFINITY : m + std::log(s);
    finite = finite && !std::isnan(lw);
    monotone = monotone && !(lw > prev);
    prev = lw;
    out.table.add({lam, lw, pos_total});
  }
  check(out, "weighted norm on {rho <= 0} is nonincreasing in lambda", monotone && finite,
        std::to_string(lambdas.size()) + " lambdas, " + std::to_string(paths) + " paths");
  return out;
}

// Inequalities

AnalyticFn cone_rho(int n, double alpha, double t0, const std::vector<double>& x1) {
  // alpha/2 (t - t0)^2 - |x - x1|^2
  auto square = [&](int var, double centre, double c) {
    std::vector<fields::Profile> f(static_cast<std::size_t>(n + 1), fields::Profile::one());
    f[static_cast<std::size_t>(var)] = fields::Profile::poly({c * centre * centre, -2.0 * c * centre, c});
    return AnalyticFn(n, {fields::SeparableTerm{1.0, f}});
  };
  AnalyticFn r = square(0, t0, 0.5 * alpha);
  for (int j = 1; j <= n; ++j) r += square(j, x1[static_cast<std::size_t>(j - 1)], -1.0);
  return r;
}

Outcome inequality_scan(Reader& r, const Overrides& o) {
  verify::GapSetup s;
  s.preset = verify::parse_gap_preset(r.string("preset", "T4.2"));
  const int n = r.integer("n", 1);
  if (n < 1 || n > fields::kMaxSpaceDim) throw ConfigError("n must be 1 or 2");
  s.b1 = r.number("b1", 1.0);
  s.b2 = r.number("b2", 0.0);
  s.c0 = r.number("c0", 1.0);
  s.c1 = r.number("c1", 1.0);
  s.delta = r.number("delta", 0.01);
  s.alpha = r.number("alpha", 0.5);
  s.params.t0 = r.number("t0", 0.0);
  s.params.x0 = r.numbers("x0", std::vector<double>(static_cast<std::size_t>(n), 0.0));
  const bool cone = s.preset == verify::GapPreset::T62;
  if (cone) {
    s.c3 = r.has("c3") ? r.number("c3") : cone::c3_constant(s.alpha, s.c1);
    const auto x1 = r.numbers("x1", std::vector<double>(static_cast<std::size_t>(n), 0.0));
    if (x1.size() != static_cast<std::size_t>(n)) throw ConfigError("x1: wrong dimension");
    s.rho = r.has("rho") ? parse_function(r.raw("rho"), n, "rho") : cone_rho(n, s.alpha, s.params.t0, x1);
    s.varrho = r.has("varrho") ? parse_function(r.raw("varrho"), n, "varrho") : AnalyticFn::constant(n, 2.0);
  } else {
    s.rho = parse_function(r.raw("rho"), n, "rho");
    s.varrho = r.has("varrho") ? parse_function(r.raw("varrho"), n, "varrho") : AnalyticFn::zero(n);
  }
  const bool lemma = r.boolean("lemma", s.preset == verify::GapPreset::T42 || s.preset == verify::GapPreset::T51);
  if (lemma) {
    const auto ch = weights::choose_gamma_mu(s.rho, s.varrho, Point{s.params.t0, s.params.x0}, s.c0, s.c1);
    s.params.gamma = ch.gamma;
    s.params.mu = ch.mu;
    if (r.has("gamma") || r.has("mu")) throw ConfigError("gamma and mu are chosen by the lemma; set \"lemma\": false to fix them");
  } else {
    s.params.gamma = r.number("gamma", 1.0);
    s.params.mu = r.number("mu", 0.0);
  }
  s.manufactured = parse_function(r.raw("manufactured"), n, "manufactured");
  s.is_w = r.boolean("is_w", false);
  Reader reg = r.object("region");
  const auto tb = reg.numbers("t");
  if (tb.size() != 2) throw ConfigError("region.t: expected [lo, hi]");
  s.region.t = {tb[0], tb[1]};
  const json& xb = reg.raw("x");
  if (!xb.is_array() || xb.size() != static_cast<std::size_t>(n)) throw ConfigError("region.x: one [lo, hi] per axis");
  for (const auto& b : xb) {
    if (!b.is_array() || b.size() != 2) throw ConfigError("region.x: one [lo, hi] per axis");
    s.region.x.push_back({b[0].get<double>(), b[1].get<double>()});
  }
  s.region.h = reg.number("h", 0.02);
  reg.finish();
  const auto lambdas = r.numbers("lambdas", std::vector<double>{8, 16, 32, 64});
  const bool expect_nonneg = r.boolean("expect_nonnegative", s.preset == verify::GapPreset::T42 || cone);
  const bool homogeneity = r.boolean("homogeneity", true);
  (void)seed_of(r, o);
  r.finish();

  const auto rows = verify::inequality_gap(s, lambdas);
  std::vector<verify::GapRow> doubled;
  if (homogeneity) {
    verify::GapSetup s2 = s;
    s2.manufactured = s.manufactured.scaled(2.0);
    doubled = verify::inequality_gap(s2, lambdas);
  }

  Outcome out;
  out.table.columns = {"preset", "lambda", "amplitude", "lhs", "rhs", "gap", "log_scale"};
  bool nonneg = true, homog = true;
  double worst_h = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.table.add({verify::to_string(s.preset), rows[i].lambda, 1.0, rows[i].lhs, rows[i].rhs, rows[i].gap,
                   rows[i].log_scale});
    nonneg = nonneg && rows[i].gap >= 0;
    if (homogeneity) {
      const auto& d = doubled[i];
      out.table.add({verify::to_string(s.preset), d.lambda, 2.0, d.lhs, d.rhs, d.gap, d.log_scale});
      const double e = std::abs(d.gap - 4.0 * rows[i].gap) / std::max({std::abs(d.gap), 4.0 * std::abs(rows[i].gap), 1e-300});
      worst_h = std::max(worst_h, e);
      homog = homog && e <= 1e-10;
    }
  }
  out.log.push_back("gamma " + num(s.params.gamma) + ", mu " + num(s.params.mu));
  if (expect_nonneg) check(out, verify::to_string(s.preset) + " gap non-negative for every lambda", nonneg, "");
  if (s.preset == verify::GapPreset::T42) {
    bool rising = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
      rising = rising && (rows[i].lambda < rows[i - 1].lambda || rows[i].gap >= rows[i - 1].gap);
    check(out, "T4.2 gap nondecreasing in lambda", rising, "");
  }
  if (homogeneity) check(out, "gap(2v) = 4 gap(v)", homog, "max relative deviation " + num(worst_h));
  return out;
}

// Geometry

Outcome geometry(Reader& r, const Overrides& o) {
  const double alpha = r.number("alpha", 0.5);
  const double c1 = r.number("c1", 1.0);
  const double t0 = r.number("t0", 0.0);
  const auto x0 = r.numbers("x0", std::vector<double>{0.0, 0.0});
  auto dir = r.numbers("direction", [&] {
    std::vector<double> d(x0.size(), 0.0);
    if (!d.empty()) d[0] = 1.0;
    return d;
  }());
  const int witnesses = count_of(r, "witnesses", 20);
  const int mesh = count_of(r, "mesh_samples", 100000);
  const double expect_c3 = r.has("expect_c3") ? r.number("expect_c3") : NAN;
  const std::uint64_t seed = seed_of(r, o);
  r.finish();
  if (x0.empty() || x0.size() > 2 || dir.size() != x0.size()) throw ConfigError("x0 and direction: 1 or 2 coordinates each");
  double dn = 0.0;
  for (double v : dir) dn += v * v;
  dn = std::sqrt(dn);
  if (!(dn > 0)) throw ConfigError("direction must be nonzero");

  const double c3 = cone::c3_constant(alpha, c1);
  const double D = 2.0 * std::sqrt(c3);
  std::vector<double> x1 = x0;
  for (std::size_t i = 0; i < x1.size(); ++i) x1[i] += D * dir[i] / dn;
  const auto v = cone::vertex(t0, x0, x1, alpha, c3);
  const auto q0 = cone::ConeSpec::q0(t0, x0, alpha);
  const auto q1 = cone::ConeSpec::q1(t0, x1, alpha, c3);

  Outcome out;
  out.table.columns = {"quantity", "index", "value", "q0", "q1", "pass"};
  out.table.add({"c3", 0.0, c3, "", "", flag(std::isnan(expect_c3) || c3 == expect_c3)});
  out.table.add({"t2", 0.0, v.t2, to_string(cone::membership({v.t2, v.x2}, q0)),
                 to_string(cone::membership({v.t2, v.x2}, q1)), 1.0});
  for (std::size_t i = 0; i < v.x2.size(); ++i) out.table.add({"x2", double(i), v.x2[i], "", "", 1.0});
  out.table.add({"T0", 0.0, v.T0, "", "", 1.0});
  out.table.add({"X0", 0.0, v.X0, "", "", 1.0});
  out.table.add({"residual_q0", 0.0, v.residual_q0, "", "", flag(v.residual_q0 <= 1e-9)});
  out.table.add({"residual_q1", 0.0, v.residual_q1, "", "", flag(v.residual_q1 <= 1e-9)});
  const auto apex = cone::membership({t0, x0}, q0);
  out.table.add({"apex", 0.0, t0, to_string(apex), "", flag(apex == cone::Membership::Boundary)});

  fields::RandomStream rng(seed, 0);
  const double q = std::sqrt(1.5) - 1.0;
  int good = 0;
  for (int i = 0; i < witnesses; ++i) {
    const double k = rng.uniform(-q, q);
    Point p{v.t2, x1};
    for (std::size_t j = 0; j < x1.size(); ++j) p.x[j] += k * (x0[j] - x1[j]);
    const auto m0 = cone::membership(p, q0), m1 = cone::membership(p, q1);
    const bool ok = m1 == cone::Membership::Inside && m0 == cone::Membership::Outside;
    good += ok ? 1 : 0;
    out.table.add({"witness_k", double(i), k, to_string(m0), to_string(m1), flag(ok)});
  }
  const double tmin = cone::min_intersection_time(t0, x0, x1, alpha, c3, mesh);
  out.table.add({"min_intersection_time", double(mesh), tmin, "", "", flag(tmin >= v.t2 - 1e-6)});

  if (!std::isnan(expect_c3)) check(out, "c3 equals the expected value", c3 == expect_c3, num(c3) + " vs " + num(expect_c3));
  check(out, "vertex satisfies both defining equations", v.residual_q0 <= 1e-9 && v.residual_q1 <= 1e-9,
        "residuals " + num(v.residual_q0) + ", " + num(v.residual_q1));
  check(out, "apex lies on the boundary of Q0", apex == cone::Membership::Boundary, to_string(apex));
  check(out, "witnesses inside Q1 and outside Q0", good == witnesses,
        std::to_string(good) + "/" + std::to_string(witnesses));
  check(out, "no intersection point earlier than t2", tmin >= v.t2 - 1e-6,
        "min sampled time " + num(tmin) + ", t2 " + num(v.t2));
  return out;
}

Outcome sweep(Reader& r, const Overrides& o) {
  const double alpha = r.number("alpha", 0.5);
  const double c1 = r.number("c1", 1.0);
  const auto sc = cone::cone_scales(alpha, c1);
  const double target_T = r.number("target_T", 2.0 * sc.T0);
  const double radius = r.number("radius", std::sqrt(alpha) * sc.T0 + 3.0 * sc.X0);
  cone::SweepOptions opt;
  opt.n = r.integer("n", 2);
  opt.spacing = r.number("spacing", 1e-2);
  opt.base_times = count_of(r, "base_times", 9);
  opt.directions = count_of(r, "directions", 16);
  opt.threads = o.threads;
  (void)seed_of(r, o);
  r.finish();

  Outcome out;
  out.table.columns = {"step", "T0", "X0", "radius_at_T0", "surface_samples", "min_surface_time", "max_witness_excess"};
  try {
    const auto res = cone::sweep_cover(alpha, c1, target_T, radius, opt);
    for (const auto& s : res.states)
      out.table.add({double(s.step), s.T0, s.X0, s.radius_at_T0, double(s.surface_samples), s.min_surface_time,
                     s.max_witness_radius});
    const int expected = std::max(0, static_cast<int>(std::ceil((radius - std::sqrt(alpha) * sc.T0) / sc.X0 - 1e-9)));
    const double reached = res.states.empty() ? std::sqrt(alpha) * sc.T0 : res.states.back().radius_at_T0;
    check(out, "step count", res.steps == expected, std::to_string(res.steps) + " steps");
    check(out, "certified radius covers the request", reached >= radius * (1 - 1e-12), num(reached) + " >= " + num(radius));
    bool times_ok = true;
    for (const auto& s : res.states) times_ok = times_ok && s.min_surface_time >= sc.T0 * (1 - 1e-9);
    check(out, "hypothesis surfaces start at T0", times_ok, "T0 " + num(sc.T0));
    check(out, "hypothesis surfaces inside the certified region", true, "all samples contained");
  } catch (const GeometryError& e) {
    check(out, "hypothesis surfaces inside the certified region", false, e.what());
  }
  return out;
}

using Command = std::function<Outcome(Reader&, const Overrides&)>;

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> m{
      {"identity-check", identity_check}, {"conjugation-check", conjugation_check},
      {"expansion-check", expansion_check}, {"d2-check", d2_check},
      {"psd-check", psd_check},            {"assumption-check", assumption_check},
      {"qv-check", qv_check},              {"inequality-scan", inequality_scan},
      {"propagation", propagation_run},    {"ucp-decay", ucp_decay},
      {"geometry", geometry},              {"sweep", sweep},
  };
  return m;
}

// Columns the gnuplot script plots against each other.
std::pair<std::string, std::string> plot_axes(const std::string& cmd) {
  static const std::map<std::string, std::pair<std::string, std::string>> m{
      {"identity-check", {"case", "rel_residual"}}, {"conjugation-check", {"case", "rel_residual"}},
      {"expansion-check", {"point", "rel_err"}},    {"d2-check", {"sample", "rel_err"}},
      {"psd-check", {"tau", "min_eig"}},            {"assumption-check", {"point", "min_eig"}},
      {"qv-check", {"quantity", "value"}},          {"inequality-scan", {"lambda", "gap"}},
      {"propagation", {"time", "local_energy"}},    {"ucp-decay", {"lambda", "log_weighted_norm"}},
      {"geometry", {"index", "value"}},             {"sweep", {"step", "radius_at_T0"}},
  };
  return m.at(cmd);
}

}  // namespace

bool Outcome::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

const std::vector<Route>& routes() {
  static const std::vector<Route> r{
      {"identity-check", "randomized pointwise weighted identity",
       {"identity_verifier.identity_residual", "carleman_weights.eval_frame", "carleman_weights.eval_D",
        "carleman_weights.eval_VN", "field_kit.analytic_jets"}},
      {"conjugation-check", "conjugation and cutoff identities in the cutoff transition band",
       {"identity_verifier.conjugation_residual", "carleman_weights.eval_frame"}},
      {"expansion-check", "lambda fits of A and B against their predicted leading coefficients",
       {"carleman_weights.eval_D", "carleman_weights.eval_frame"}},
      {"d2-check", "matrix and divergence forms of D2", {"carleman_weights.eval_D", "carleman_weights.build_M"}},
      {"psd-check", "positivity certificate for a distance-like function", {"carleman_weights.psd_certificate"}},
      {"assumption-check", "assumption presets at listed points", {"carleman_weights.assumption_check",
                                                                   "carleman_weights.build_M"}},
      {"qv-check", "realized against modelled quadratic variation",
       {"identity_verifier.qv_check", "spde_solver.solve", "spde_solver.step", "spde_solver.manufactured_forcing",
        "field_kit.sample_brownian", "field_kit.make_grid"}},
      {"inequality-scan", "inequality gaps over lambda",
       {"identity_verifier.inequality_gap", "carleman_weights.eval_frame", "carleman_weights.eval_D",
        "carleman_weights.build_M", "cone_geometry.c3_constant"}},
      {"propagation", "finite propagation speed energy traces",
       {"propagation_lab.run_propagation", "propagation_lab.local_energy", "propagation_lab.distance_to_set",
        "spde_solver.solve", "spde_solver.total_energy", "field_kit.sample_brownian", "field_kit.make_grid"}},
      {"ucp-decay", "weighted norm decay in lambda",
       {"spde_solver.solve", "field_kit.fd_apply", "field_kit.make_grid", "field_kit.sample_brownian"}},
      {"geometry", "c3, vertex, membership witnesses and vertex minimality",
       {"cone_geometry.c3_constant", "cone_geometry.vertex", "cone_geometry.membership"}},
      {"sweep", "covering schedule", {"cone_geometry.sweep_cover", "cone_geometry.membership"}},
  };
  return r;
}

Outcome execute(const std::string& subcommand, const json& config, const Overrides& o) {
  const auto& m = commands();
  const auto it = m.find(subcommand);
  if (it == m.end()) throw ConfigError("unknown subcommand '" + subcommand + "'");
  Reader r(config, "config");
  const std::string exp = r.string("experiment", subcommand);
  if (exp != subcommand) throw ConfigError("config is for '" + exp + "', not '" + subcommand + "'");
  (void)r.integer("threads", 0);
  Outcome out = it->second(r, o);
  json canon = config;
  if (o.seed) canon["seed"] = *o.seed;
  if (o.paths) canon["paths"] = *o.paths;
  out.table.config_hash = config_hash(canon);
  return out;
}

int run(const RunOptions& opt, std::string* message) {
  namespace fs = std::filesystem;
  auto say = [&](const std::string& s) {
    if (message != nullptr) *message += s + "\n";
  };
  json config;
  {
    std::ifstream f(opt.config_path);
    if (!f) {
      say("error: cannot read config '" + opt.config_path + "'");
      return 2;
    }
    try {
      config = json::parse(f);
    } catch (const json::exception& e) {
      say(std::string("error: config is not valid JSON: ") + e.what());
      return 2;
    }
  }
  Overrides ov = opt.overrides;
  if (config.is_object() && config.contains("threads") && config["threads"].is_number_unsigned() && ov.threads == 0)
    ov.threads = config["threads"].get<unsigned>();

  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  std::string failure;
  try {
    out = execute(opt.subcommand, config, ov);
  } catch (const ConfigError& e) {
    say(std::string("config error: ") + e.what());
    return 2;
  } catch (const InputError& e) {
    say(std::string("input error: ") + e.what());
    return 2;
  } catch (const json::exception& e) {
    say(std::string("config error: ") + e.what());
    return 2;
  } catch (const Error& e) {
    failure = e.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.table.wall_time_s = wall;

  try {
    fs::create_directories(opt.out_dir);
    const fs::path base = fs::path(opt.out_dir) / opt.subcommand;
    std::ostringstream log;
    log << "subcommand " << opt.subcommand << "\n";
    log << "config " << opt.config_path << "\n";
    log << "config_hash " << config_hash([&] {
      json c = config;
      if (ov.seed) c["seed"] = *ov.seed;
      if (ov.paths) c["paths"] = *ov.paths;
      return c;
    }()) << "\n";
    log << "artifact_version " << kArtifactVersion << "\n";
    log << "workers " << worker_count(ov.threads) << "\n";
    for (const auto& l : out.log) log << "info " << l << "\n";
    if (!failure.empty()) {
      log << "FAIL run: " << failure << "\n";
    } else {
      emit_csv(out.table, base.string() + ".csv");
      for (const auto& a : out.assertions)
        log << (a.pass ? "PASS " : "FAIL ") << a.name << (a.detail.empty() ? "" : ": " + a.detail) << "\n";
      if (opt.gnuplot) {
        const auto [x, y] = plot_axes(opt.subcommand);
        std::ofstream gp(base.string() + ".gp", std::ios::binary);
        gp << "set datafile separator ','\n"
           << "set key autotitle columnhead\n"
           << "set xlabel '" << x << "'\nset ylabel '" << y << "'\n"
           << "plot '" << opt.subcommand << ".csv' using (column('" << x << "')):(column('" << y
           << "')) with linespoints\n";
        if (!gp) throw IoError("failed writing gnuplot script");
      }
    }
    const bool ok = failure.empty() && out.passed();
    log << "result " << (ok ? "pass" : "fail") << "\n";
    log << "wall_time_s " << format_double(wall) << "\n";
    std::ofstream lf(base.string() + ".log", std::ios::binary | std::ios::trunc);
    if (!lf) throw IoError("cannot write run log in '" + opt.out_dir + "'");
    lf << log.str();
    for (const auto& a : out.assertions)
      if (!a.pass) say("FAIL " + a.name + (a.detail.empty() ? "" : ": " + a.detail));
    if (!failure.empty()) say("FAIL run: " + failure);
    say(std::string(ok ? "pass" : "fail") + ": " + base.string() + ".csv");
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    say(std::string("I/O error: ") + e.what());
    return 1;
  }
}

}  // namespace carleman::lab
