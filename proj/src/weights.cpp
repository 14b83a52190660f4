#include "carleman/weights.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "carleman/errors.hpp"
#include "carleman/rng.hpp"

namespace carleman::weights {
namespace {

constexpr int kRhoOrder = 4;

Taylor laplacian(const Taylor& f, int n) {
  Taylor out = f.diff(1).diff(1);
  for (int i = 2; i <= n; ++i) out += f.diff(i).diff(i);
  return out;
}

Taylor second_t(const Taylor& f) { return f.diff(0).diff(0); }

// (t - t0) or (x_i - x0_i) as a jet.
Taylor offset(const CarlemanFrame& f, int var, int order) {
  const int dim = f.n() + 1;
  if (var == 0) return Taylor::variable(dim, order, 0, f.point.t - f.params.t0);
  const auto i = static_cast<std::size_t>(var - 1);
  return Taylor::variable(dim, order, var, f.point.x[i] - f.params.x0[i]);
}

Taylor from_jet2(const Jet2& j) {
  const int dim = j.n + 1;
  Taylor t(dim, 2);
  t.set_coefficient({0, 0, 0}, j.value);
  t.set_coefficient({1, 0, 0}, j.grad_t);
  t.set_coefficient({2, 0, 0}, 0.5 * j.hess_tt);
  for (int a = 0; a < j.n; ++a) {
    fields::MultiIndex e{};
    e[static_cast<std::size_t>(a + 1)] = 1;
    t.set_coefficient(e, j.grad_x[static_cast<std::size_t>(a)]);
    fields::MultiIndex et = e;
    et[0] = 1;
    t.set_coefficient(et, j.hess_tx[static_cast<std::size_t>(a)]);
    for (int b = a; b < j.n; ++b) {
      fields::MultiIndex m = e;
      m[static_cast<std::size_t>(b + 1)] += 1;
      t.set_coefficient(m, (a == b ? 0.5 : 1.0) * j.hess_xx(a, b));
    }
  }
  return t;
}

}  // namespace

void WeightParams::validate(int n) const {
  if (!(lambda > 0)) throw PreconditionError("weights: lambda must be positive");
  if (!(gamma > 0)) throw PreconditionError("weights: gamma must be positive");
  if (!(mu >= 0)) throw PreconditionError("weights: mu must be non-negative");
  if (static_cast<int>(x0.size()) != n) throw PreconditionError("weights: center dimension mismatch");
}

CarlemanFrame eval_frame(const AnalyticFn& rho, const Point& p, const WeightParams& params,
                         const AnalyticFn& varrho) {
  const int n = p.n();
  params.validate(n);
  if (rho.n() != n || varrho.n() != n) throw PreconditionError("eval_frame: function dimension mismatch");
  CarlemanFrame f;
  f.point = p;
  f.params = params;
  f.rho = rho.jet(p, kRhoOrder);
  f.varrho = varrho.jet(p, 2);
  f.psi = fields::exp(params.gamma * f.rho);

  Taylor dist2 = offset(f, 0, kRhoOrder) * offset(f, 0, kRhoOrder);
  for (int i = 1; i <= n; ++i) dist2 += offset(f, i, kRhoOrder) * offset(f, i, kRhoOrder);
  f.phi = f.psi - params.mu * dist2;
  f.ell = params.lambda * f.phi;
  if (!(f.ell.value() < 709.0))
    throw RangeError("eval_frame: lambda*phi = " + std::to_string(f.ell.value()) + " overflows exp");
  f.theta = std::exp(f.ell.value());

  const double lam = params.lambda;
  const Taylor lap = laplacian(f.ell, n);
  const Taylor ltt = second_t(f.ell);
  f.Psi = lap - ltt + (2.0 * lam * params.gamma) * (f.psi * f.varrho) + 6.0 * lam * params.mu;

  const Taylor lt = f.ell.diff(0);
  Taylor grad2 = f.ell.diff(1) * f.ell.diff(1);
  for (int i = 2; i <= n; ++i) grad2 += f.ell.diff(i) * f.ell.diff(i);
  f.A = lt * lt - ltt - grad2 + lap - f.Psi;
  return f;
}

CarlemanFrame eval_frame(const AnalyticFn& rho, const Point& p, const WeightParams& params) {
  return eval_frame(rho, p, params, AnalyticFn::zero(p.n()));
}

SymMatrix build_M(const Jet2& rho, double varrho) {
  SymMatrix m(rho.n + 1);
  m.set(0, 0, rho.hess_tt - varrho);
  for (int j = 0; j < rho.n; ++j) {
    m.set(0, j + 1, -rho.hess_tx[static_cast<std::size_t>(j)]);
    for (int k = j; k < rho.n; ++k) m.set(j + 1, k + 1, (j == k ? varrho : 0.0) + rho.hess_xx(j, k));
  }
  return m;
}

DQuantities eval_D(const CarlemanFrame& f) {
  const int n = f.n();
  const double g = f.params.gamma;
  const double mu = f.params.mu;
  DQuantities d;

  const Taylor psi_t = f.psi.diff(0);
  Taylor P = psi_t * psi_t;
  for (int i = 1; i <= n; ++i) P -= f.psi.diff(i) * f.psi.diff(i);

  // D1 = 4 mu^2 [(t-t0)^2 - |x-x0|^2] - 4 mu [(t-t0) psi_t - (x-x0).grad psi]
  const Taylor s = offset(f, 0, 3);
  Taylor sq = s * s;
  Taylor lin = s * psi_t;
  for (int i = 1; i <= n; ++i) {
    const Taylor y = offset(f, i, 3);
    sq -= y * y;
    lin -= y * f.psi.diff(i);
  }
  const Taylor D1 = (4.0 * mu * mu) * sq - (4.0 * mu) * lin;
  const Taylor E = P + D1;

  const double psi = f.psi.value();
  const double vr = f.varrho.value();
  d.P = P.value();
  d.D1 = D1.value();

  double div = 2.0 * g * psi * vr * P.value() + P.d1(0) * psi_t.value();
  for (int i = 1; i <= n; ++i) div -= P.d1(i) * f.psi.d1(i);
  d.D2_div = div;

  const Jet2 r = f.rho_jet();
  const SymMatrix M = build_M(r, vr);
  std::vector<double> grad{r.grad_t};
  double S = r.grad_t * r.grad_t;
  for (int j = 0; j < n; ++j) {
    grad.push_back(r.grad_x[static_cast<std::size_t>(j)]);
    S -= r.grad_x[static_cast<std::size_t>(j)] * r.grad_x[static_cast<std::size_t>(j)];
  }
  const double q = M.quadratic_form(grad);
  const double g3p3 = g * g * g * psi * psi * psi;
  d.D2 = 4.0 * g3p3 * vr * S + 2.0 * g3p3 * q + 2.0 * g * g3p3 * S * S;

  double d3 = 2.0 * g * psi * vr * D1.value() + 6.0 * mu * E.value() + D1.d1(0) * psi_t.value() -
              2.0 * mu * s.value() * E.d1(0);
  for (int i = 1; i <= n; ++i)
    d3 += -D1.d1(i) * f.psi.d1(i) + 2.0 * mu * offset(f, i, 1).value() * E.d1(i);
  d.D3 = d3;

  const Taylor& A = f.A;
  const Taylor lt = f.ell.diff(0);
  d.A = A.value();
  double B = A.value() * f.Psi.value() + (A * lt).d1(0) + 0.5 * f.Psi.d2(0, 0);
  for (int i = 1; i <= n; ++i) B -= (A * f.ell.diff(i)).d1(i) + 0.5 * f.Psi.d2(i, i);
  d.B = B;

  double div_terms = std::abs(2.0 * g * psi * vr * P.value()) + std::abs(P.d1(0) * psi_t.value());
  for (int i = 1; i <= n; ++i) div_terms += std::abs(P.d1(i) * f.psi.d1(i));
  d.D2_scale = std::abs(4.0 * g3p3 * vr * S) + std::abs(2.0 * g3p3 * q) + std::abs(2.0 * g * g3p3 * S * S) + div_terms;

#ifndef NDEBUG
  if (std::abs(d.D2 - d.D2_div) > 1e-8 * (d.D2_scale + 1e-300)) {
    std::fprintf(stderr, "eval_D: D2 forms disagree (%.17g vs %.17g)\n", d.D2, d.D2_div);
    std::abort();
  }
#endif
  return d;
}

VNJets eval_VN(const Taylor& v, const CarlemanFrame& f) {
  const int n = f.n();
  if (v.order() < 1) throw CapabilityError("eval_VN: v needs a first-order jet");
  const Taylor lt = f.ell.diff(0);
  const Taylor vt = v.diff(0);
  const Taylor& Psi = f.Psi;
  const Taylor& A = f.A;
  std::vector<Taylor> gl, gv;
  for (int i = 1; i <= n; ++i) {
    gl.push_back(f.ell.diff(i));
    gv.push_back(v.diff(i));
  }
  Taylor dot = gl[0] * gv[0];
  Taylor gv2 = gv[0] * gv[0];
  for (std::size_t i = 1; i < gv.size(); ++i) {
    dot += gl[i] * gv[i];
    gv2 += gv[i] * gv[i];
  }
  const Taylor v2 = v * v;
  VNJets out;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    Taylor Vi = 2.0 * dot * gv[k] - gl[k] * gv2 - 2.0 * lt * gv[k] * vt + gl[k] * vt * vt + Psi * v * gv[k] -
                0.5 * Psi.diff(i + 1) * v2 - A * v2 * gl[k];
    out.V.push_back(std::move(Vi));
  }
  out.N = lt * gv2 + lt * vt * vt - 2.0 * dot * vt - Psi * v * vt + (A * lt + 0.5 * Psi.diff(0)) * v2;
  return out;
}

VNValues eval_VN(const Jet2& v, const CarlemanFrame& f) {
  const VNJets j = eval_VN(from_jet2(v), f);
  VNValues out;
  for (const auto& Vi : j.V) out.V.push_back(Vi.value());
  out.N = j.N.value();
  return out;
}

// ---------------------------------------------------------------------------

double psd_min_eig(const SymMatrix& hess_g, double tau) {
  const SymMatrix m = SymMatrix::identity(hess_g.dim()) - hess_g * (1.0 / tau);
  return fields::eigenvalues(m).front();
}

bool psd_accepts(const SymMatrix& hess_g, double tau) { return psd_min_eig(hess_g, tau) >= kPsdMargin; }

SymMatrix spatial_hessian(const AnalyticFn& g, std::span<const double> x0) {
  const int n = g.n();
  const Taylor j = g.jet(Point{0.0, {x0.begin(), x0.end()}}, 2);
  SymMatrix h(n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) h.set(a, b, j.d2(a + 1, b + 1));
  return h;
}

PsdCertificate psd_certificate(const AnalyticFn& g, std::span<const double> x0, std::uint64_t seed, int samples) {
  const int n = g.n();
  if (static_cast<int>(x0.size()) != n) throw PreconditionError("psd_certificate: point dimension mismatch");
  if (!g.is_time_independent()) throw PreconditionError("psd_certificate: g must not depend on t");
  const Point p{0.0, {x0.begin(), x0.end()}};
  const Taylor gj = g.jet(p, 2);
  std::vector<double> grad(static_cast<std::size_t>(n));
  double norm2 = 0.0;
  for (int a = 0; a < n; ++a) {
    grad[static_cast<std::size_t>(a)] = gj.d1(a + 1);
    norm2 += grad[static_cast<std::size_t>(a)] * grad[static_cast<std::size_t>(a)];
  }
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-9)
    throw PreconditionError("psd_certificate: |grad g(x0)| = " + std::to_string(std::sqrt(norm2)) + ", expected 1");

  const SymMatrix H = spatial_hessian(g, x0);
  PsdCertificate c;
  c.hess_eigs = fields::eigenvalues(H);
  double tau = 1.0;
  while (!psd_accepts(H, tau)) {
    tau *= 2.0;
    ++c.doublings;
    if (tau > kTauCap) throw RangeError("psd_certificate: tau search exceeded 2^20");
  }
  c.tau = tau;
  c.min_eig = psd_min_eig(H, tau);

  // rho = exp(tau (t - t0)) - exp(tau (g - t0)) at (t0, x0) with t0 = g(x0).
  const double t0 = gj.value();
  const int dim = n + 1;
  const Point q{t0, p.x};
  const Taylor gt = g.jet(q, 2);
  const Taylor tt = Taylor::variable(dim, 2, 0, t0);
  const Taylor rho = fields::exp(tau * (tt - t0)) - fields::exp(tau * (gt - t0));
  SymMatrix Mt(n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) Mt.set(a, b, (a == b ? rho.d2(0, 0) : 0.0) + rho.d2(a + 1, b + 1));

  fields::RandomStream rs(seed, 0);
  c.tangent_min = 0.0;
  bool first = true;
  for (int s = 0; s < samples; ++s) {
    std::vector<double> y(static_cast<std::size_t>(n));
    double dot = 0.0;
    for (int a = 0; a < n; ++a) {
      y[static_cast<std::size_t>(a)] = rs.normal();
      dot += y[static_cast<std::size_t>(a)] * grad[static_cast<std::size_t>(a)];
    }
    double yn = 0.0;
    for (int a = 0; a < n; ++a) {
      y[static_cast<std::size_t>(a)] -= dot * grad[static_cast<std::size_t>(a)] / norm2;
      yn += y[static_cast<std::size_t>(a)] * y[static_cast<std::size_t>(a)];
    }
    yn = std::sqrt(yn);
    // In one dimension the tangent space is {0}.
    for (auto& yi : y) yi = yn > 1e-12 ? yi / yn : 0.0;
    const double qf = Mt.quadratic_form(y);
    c.tangent_min = first ? qf : std::min(c.tangent_min, qf);
    first = false;
  }
  c.tangent_samples = samples;
  return c;
}

std::string to_string(AssumptionPreset p) {
  switch (p) {
    case AssumptionPreset::A21:
      return "A2.1";
    case AssumptionPreset::A22:
      return "A2.2";
    case AssumptionPreset::A23:
      return "A2.3";
  }
  return "?";
}

AssumptionPreset parse_assumption_preset(const std::string& s) {
  if (s == "A2.1") return AssumptionPreset::A21;
  if (s == "A2.2") return AssumptionPreset::A22;
  if (s == "A2.3") return AssumptionPreset::A23;
  throw ConfigError("unknown assumption preset '" + s + "' (expected A2.1, A2.2 or A2.3)");
}

AssumptionReport assumption_check(const Jet2& rho, double varrho, AssumptionPreset preset, double c0, double c1,
                                  double b1_norm) {
  AssumptionReport r;
  r.preset = preset;
  r.rho_t = rho.grad_t;
  SymMatrix M = build_M(rho, varrho);
  if (preset == AssumptionPreset::A22) {
    r.penalty = 3.0 * std::abs(rho.grad_t) * b1_norm * b1_norm;
    M = M - SymMatrix::identity(M.dim()) * r.penalty;
  }
  r.eigenvalues = fields::eigenvalues(M);
  r.min_eig = r.eigenvalues.front();
  const double tol = 1e-12 * std::max(1.0, M.max_abs());
  r.matrix_ok = preset == AssumptionPreset::A21 ? r.min_eig >= -tol : r.min_eig > tol;
  // Clauses that a preset does not state count as satisfied.
  r.rho_t_ok = preset == AssumptionPreset::A22 || r.rho_t >= c0;
  r.b1_ok = preset != AssumptionPreset::A21 || (c1 > 0 && c1 <= b1_norm);
  return r;
}

LemmaChoice choose_gamma_mu(const AnalyticFn& rho, const AnalyticFn& varrho, const Point& center, double c0,
                            double c1) {
  if (!(c0 > 0) || !(c1 > 0)) throw PreconditionError("choose_gamma_mu: c0 and c1 must be positive");
  LemmaChoice ch;
  WeightParams wp;
  wp.t0 = center.t;
  wp.x0 = center.x;
  wp.lambda = 1.0;
  wp.mu = 0.0;
  for (ch.gamma = 1.0;; ch.gamma *= 2.0) {
    if (ch.gamma > kTauCap) throw RangeError("choose_gamma_mu: no gamma up to 2^20 makes D2 >= 0");
    wp.gamma = ch.gamma;
    if (eval_D(eval_frame(rho, center, wp, varrho)).D2 >= 0) break;
  }
  const double g = ch.gamma;
  for (ch.mu = 1.0;; ch.mu *= 0.5) {
    if (ch.mu < 1e-12) throw RangeError("choose_gamma_mu: no mu down to 1e-12 satisfies the center conditions");
    wp.mu = ch.mu;
    const CarlemanFrame f = eval_frame(rho, center, wp, varrho);
    const DQuantities d = eval_D(f);
    ch.phi_t = f.phi.d1(0);
    ch.D2 = d.D2;
    ch.D3 = d.D3;
    const double first = 0.5 * c1 * c1 * std::pow(ch.phi_t, 3) + d.D2 + d.D3;
    const double second = 0.5 * ch.phi_t * c1 * c1 - 11.0 * ch.mu;
    if (first >= g * g * g * c0 * c0 * c0 * c1 * c1 / 3.0 && second >= g * c0 * c1 * c1 / 3.0) break;
  }
  return ch;
}

}  // namespace carleman::weights
