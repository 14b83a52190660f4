#include "carleman/identity.hpp"

#include <algorithm>
#include <cmath>

#include "carleman/errors.hpp"

namespace carleman::verify {
namespace {

double laplacian_value(const Taylor& f, int n) {
  double s = 0.0;
  for (int i = 1; i <= n; ++i) s += f.d2(i, i);
  return s;
}

Point random_point(fields::RandomStream& rng, int n, double half_width) {
  Point p;
  p.t = rng.uniform(-half_width, half_width);
  for (int i = 0; i < n; ++i) p.x.push_back(rng.uniform(-half_width, half_width));
  return p;
}

fields::Family random_family(fields::RandomStream& rng) {
  return static_cast<fields::Family>(static_cast<int>(rng.next_u64() % 4));
}

}  // namespace

void CutoffSpec::validate() const {
  if (!(c2 > 0 && c2 < 1)) throw PreconditionError("cutoff: c2 must lie in (0, 1)");
  if (!(eps > 0)) throw PreconditionError("cutoff: eps must be positive");
}

std::array<double, 3> CutoffSpec::profile(double phi) const {
  const double s = (phi - c2) / eps;
  if (s <= 0) return {0.0, 0.0, 0.0};
  if (s >= 1) return {1.0, 0.0, 0.0};
  const double s2 = s * s;
  const double S = s2 * s * (10.0 - 15.0 * s + 6.0 * s2);
  const double S1 = 30.0 * s2 * (1.0 - s) * (1.0 - s);
  const double S2 = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
  return {S, S1 / eps, S2 / (eps * eps)};
}

double CutoffSpec::max_first() const { return 15.0 / (8.0 * eps); }

double CutoffSpec::max_second() const { return 10.0 / (std::sqrt(3.0) * eps * eps); }

Taylor CutoffSpec::jet(const Taylor& phi) const {
  const auto d = profile(phi.value());
  return phi.truncated(2).compose(d);
}

void IdentityReport::finish() {
  residual = lhs - rhs;
  pass = std::abs(residual) <= tolerance * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

IdentityReport identity_residual(const AnalyticFn& w, const AnalyticFn& rho, const AnalyticFn& varrho,
                                 const WeightParams& params, const Point& p, double tol) {
  const int n = p.n();
  const CarlemanFrame f = weights::eval_frame(rho, p, params, varrho);
  const Taylor wj = w.jet(p, 2);
  const Taylor v = fields::exp(f.ell) * wj;
  const Taylor& l = f.ell;
  const double Psi = f.Psi.value();

  const double vt = v.d1(0);
  double I = -2.0 * l.d1(0) * vt + Psi * v.value();
  double gv2 = 0.0, hess_form = 0.0, mixed = 0.0;
  for (int j = 1; j <= n; ++j) {
    I += 2.0 * l.d1(j) * v.d1(j);
    gv2 += v.d1(j) * v.d1(j);
    mixed += l.d2(0, j) * v.d1(j);
    for (int k = 1; k <= n; ++k) hess_form += l.d2(j, k) * v.d1(j) * v.d1(k);
  }
  const double ltt = l.d2(0, 0);
  const double lap = laplacian_value(l, n);
  const double B = weights::eval_D(f).B;

  const weights::VNJets vn = weights::eval_VN(v, f);
  double div_v = 0.0;
  for (int j = 1; j <= n; ++j) div_v += vn.V[static_cast<std::size_t>(j - 1)].d1(j);

  IdentityReport r;
  r.name = "pointwise_identity";
  r.point = p;
  r.params = params;
  r.tolerance = tol;
  r.lhs = f.theta * I * (wj.d2(0, 0) - laplacian_value(wj, n)) + div_v + vn.N.d1(0);
  r.rhs = (ltt + lap - Psi) * vt * vt + (ltt - lap + Psi) * gv2 + 2.0 * hess_form - 4.0 * mixed * vt +
          B * v.value() * v.value() + I * I;
  r.finish();
  return r;
}

std::pair<IdentityReport, IdentityReport> conjugation_residual(const AnalyticFn& u, const AnalyticFn& rho,
                                                               const WeightParams& params, const CutoffSpec& cut,
                                                               const Point& p, double tol) {
  cut.validate();
  const int n = p.n();
  const CarlemanFrame f = weights::eval_frame(rho, p, params);
  const Taylor uj = u.jet(p, 2);
  const Taylor chi = cut.jet(f.phi);
  const Taylor w = chi * uj;
  const Taylor v = fields::exp(f.ell) * w;
  const Taylor& l = f.ell;

  IdentityReport conj;
  conj.name = "conjugation";
  conj.point = p;
  conj.params = params;
  conj.tolerance = tol;
  conj.lhs = f.theta * (w.d2(0, 0) - laplacian_value(w, n));
  double grad_l2 = 0.0, cross = 0.0;
  for (int j = 1; j <= n; ++j) {
    grad_l2 += l.d1(j) * l.d1(j);
    cross += l.d1(j) * v.d1(j);
  }
  const double lt = l.d1(0);
  conj.rhs = v.d2(0, 0) - laplacian_value(v, n) + (lt * lt - grad_l2) * v.value() -
             (l.d2(0, 0) - laplacian_value(l, n)) * v.value() - 2.0 * lt * v.d1(0) + 2.0 * cross;
  conj.finish();

  IdentityReport cutr;
  cutr.name = "cutoff";
  cutr.point = p;
  cutr.params = params;
  cutr.tolerance = tol;
  cutr.lhs = w.d2(0, 0) - laplacian_value(w, n);
  double grad_dot = 0.0;
  for (int j = 1; j <= n; ++j) grad_dot += chi.d1(j) * uj.d1(j);
  cutr.rhs = chi.value() * (uj.d2(0, 0) - laplacian_value(uj, n)) + chi.d2(0, 0) * uj.value() +
             2.0 * chi.d1(0) * uj.d1(0) - 2.0 * grad_dot - laplacian_value(chi, n) * uj.value();
  cutr.finish();
  return {conj, cutr};
}

IdentityCase random_identity_case(fields::RandomStream& rng, int n, double max_lphi) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    IdentityCase c;
    c.w = fields::random_builtin(rng, n, random_family(rng), 1.0);
    c.rho = fields::random_builtin(rng, n, random_family(rng), 0.3);
    c.varrho = fields::random_builtin(rng, n, random_family(rng), 1.0);
    c.params.gamma = rng.uniform(1.0, 4.0);
    c.params.lambda = rng.uniform(1.0, 16.0);
    c.params.mu = rng.uniform(0.0, 1.0);
    const Point center = random_point(rng, n, 0.5);
    c.params.t0 = center.t;
    c.params.x0 = center.x;
    c.point = random_point(rng, n, 0.5);
    const double phi = weights::eval_frame(c.rho, c.point, c.params).phi.value();
    if (std::abs(phi) * 1.0 > max_lphi) continue;
    if (std::abs(c.params.lambda * phi) > max_lphi) c.params.lambda = max_lphi / std::abs(phi) * 0.999;
    return c;
  }
  throw PreconditionError("random_identity_case: could not meet the |lambda phi| bound");
}

ConjugationCase random_conjugation_case(fields::RandomStream& rng, int n, double max_lphi) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    ConjugationCase c;
    c.u = fields::random_builtin(rng, n, random_family(rng), 1.0);
    c.rho = fields::random_builtin(rng, n, random_family(rng), 0.3);
    c.params.gamma = rng.uniform(1.0, 4.0);
    c.params.lambda = rng.uniform(1.0, 16.0);
    c.params.mu = rng.uniform(0.0, 1.0);
    const Point center = random_point(rng, n, 0.5);
    c.params.t0 = center.t;
    c.params.x0 = center.x;
    c.point = random_point(rng, n, 0.5);
    const double phi = weights::eval_frame(c.rho, c.point, c.params).phi.value();
    c.cutoff.eps = rng.uniform(0.05, 0.5);
    c.cutoff.c2 = phi - rng.uniform(0.1, 0.9) * c.cutoff.eps;
    if (!(c.cutoff.c2 > 0 && c.cutoff.c2 < 1)) continue;
    if (std::abs(c.params.lambda * phi) > max_lphi) c.params.lambda = max_lphi / std::abs(phi) * 0.999;
    return c;
  }
  throw PreconditionError("random_conjugation_case: no transition-band point found");
}

QvReport qv_check(std::span<const spde::FieldPath> paths, const AnalyticFn& log_theta, double tol, int min_paths) {
  if (static_cast<int>(paths.size()) < min_paths)
    throw StatisticsError("qv_check: " + std::to_string(paths.size()) + " paths given, at least " +
                          std::to_string(min_paths) + " required");
  const spde::FieldPath& first = paths.front();
  if (first.diffusion.empty() || first.snapshots.empty())
    throw PreconditionError("qv_check: paths were solved without recorded diffusion samples");
  const fields::Grid& g = first.snapshots.front().u.grid();
  const double t_start = first.snapshots.front().time;
  const std::size_t steps = first.diffusion.size();
  const std::size_t nodes = g.node_count();

  // theta^2 times the trapezoid weight per (step, interior node); zero on the boundary.
  std::vector<double> weight(steps * nodes, 0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t_start + static_cast<double>(k) * g.dt;
    for (std::size_t i = 0; i < nodes; ++i) {
      if (g.boundary_distance(i) < 1) continue;
      const double lt = log_theta.is_zero() ? 0.0 : log_theta.value(t, g.position(i));
      weight[k * nodes + i] = std::exp(2.0 * lt) * spde::node_weight(g, i);
    }
  }

  double sum_r = 0.0, sum_r2 = 0.0, sum_m = 0.0;
  for (const auto& fp : paths) {
    if (fp.diffusion.size() != steps || fp.ut_increments.size() != steps)
      throw PreconditionError("qv_check: paths have different lengths or lack diffusion samples");
    double realized = 0.0, model = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      const auto& sig = fp.diffusion[k];
      const auto& inc = fp.ut_increments[k];
      for (std::size_t i = 0; i < nodes; ++i) {
        const double w = weight[k * nodes + i];
        if (w == 0.0) continue;
        realized += w * inc[i] * inc[i];
        model += w * sig[i] * sig[i] * g.dt;
      }
    }
    sum_r += realized;
    sum_r2 += realized * realized;
    sum_m += model;
  }
  const double np = static_cast<double>(paths.size());
  QvReport q;
  q.paths = static_cast<int>(paths.size());
  q.realized_mean = sum_r / np;
  q.model_mean = sum_m / np;
  q.realized_stderr = std::sqrt(std::max(0.0, (sum_r2 - np * q.realized_mean * q.realized_mean) / (np - 1)) / np);
  q.report.name = "quadratic_variation";
  q.report.tolerance = tol;
  q.report.point = Point{t_start, std::vector<double>(static_cast<std::size_t>(g.n), 0.0)};
  if (q.model_mean == 0.0 && q.realized_mean == 0.0) {
    q.report.lhs = 0.0;
    q.report.rhs = 0.0;
  } else {
    q.report.lhs = q.model_mean > 0 ? q.realized_mean / q.model_mean : INFINITY;
    q.report.rhs = 1.0;
  }
  q.report.finish();
  return q;
}

}  // namespace carleman::verify
