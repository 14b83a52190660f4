#include "carleman/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "carleman/errors.hpp"

namespace carleman::fields {
namespace {

using Derivs = std::array<double, kMaxOrder + 1>;

// Derivatives of a function given as a 1-D jet at s.
Derivs from_jet1(const Taylor& j, int order) {
  Derivs d{};
  for (int k = 0; k <= order; ++k) d[static_cast<std::size_t>(k)] = j.derivative({k, 0, 0});
  return d;
}

double param(const Profile& p, std::size_t i, double fallback = 0.0) {
  return i < p.params.size() ? p.params[i] : fallback;
}

int term_order(const Term& term) {
  return std::visit(
      [](const auto& t) -> int {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, SeparableTerm>) {
          int o = kMaxOrder;
          for (const auto& f : t.factors) o = std::min(o, f.smoothness());
          return o;
        } else if constexpr (std::is_same_v<T, ExpQuadTerm>) {
          return kMaxOrder;
        } else {
          return t.profile.smoothness();
        }
      },
      term);
}

}  // namespace

double Jet2::hess_xx(int j, int k) const {
  if (j > k) std::swap(j, k);
  return hess_xx_upper[static_cast<std::size_t>(j == 0 ? k : 2)];
}

void Jet2::set_hess_xx(int j, int k, double v) {
  if (j > k) std::swap(j, k);
  hess_xx_upper[static_cast<std::size_t>(j == 0 ? k : 2)] = v;
}

Jet2 Jet2::from_taylor(const Taylor& tj) {
  if (tj.order() < 2) throw CapabilityError("Jet2: need a second-order jet");
  Jet2 j;
  j.n = tj.dim() - 1;
  j.value = tj.value();
  j.grad_t = tj.d1(0);
  j.hess_tt = tj.d2(0, 0);
  for (int a = 0; a < j.n; ++a) {
    j.grad_x[static_cast<std::size_t>(a)] = tj.d1(a + 1);
    j.hess_tx[static_cast<std::size_t>(a)] = tj.d2(0, a + 1);
    for (int b = a; b < j.n; ++b) j.set_hess_xx(a, b, tj.d2(a + 1, b + 1));
  }
  return j;
}

// ---------------------------------------------------------------------------
// Profile

Derivs Profile::derivatives(double s, int order) const {
  if (order < 0 || order > kMaxOrder) throw CapabilityError("Profile: order must be 0..4");
  Derivs d{};
  switch (kind) {
    case Kind::One:
      d[0] = 1.0;
      break;
    case Kind::Poly: {
      // d^k/ds^k sum_m p_m s^m
      for (int k = 0; k <= order; ++k) {
        double acc = 0.0;
        for (std::size_t m = params.size(); m-- > static_cast<std::size_t>(k);) {
          double falling = 1.0;
          for (int i = 0; i < k; ++i) falling *= static_cast<double>(m) - i;
          acc = acc * s + params[m] * falling;
        }
        d[static_cast<std::size_t>(k)] = acc;
      }
      break;
    }
    case Kind::Sin:
    case Kind::Cos: {
      const double a = param(*this, 0, 1.0);
      const double arg = a * s + param(*this, 1);
      const double shift = kind == Kind::Cos ? 0.5 * std::numbers::pi : 0.0;
      double ak = 1.0;
      for (int k = 0; k <= order; ++k) {
        d[static_cast<std::size_t>(k)] = ak * std::sin(arg + shift + 0.5 * std::numbers::pi * k);
        ak *= a;
      }
      break;
    }
    case Kind::Exp: {
      const double a = param(*this, 0, 1.0);
      const double e = std::exp(a * s + param(*this, 1));
      double ak = 1.0;
      for (int k = 0; k <= order; ++k) {
        d[static_cast<std::size_t>(k)] = ak * e;
        ak *= a;
      }
      break;
    }
    case Kind::Gauss: {
      const double a = param(*this, 0, 1.0);
      const Taylor h = Taylor::variable(1, order, 0, s - param(*this, 1));
      d = from_jet1(fields::exp(-a * (h * h)), order);
      break;
    }
    case Kind::Bump: {
      const double c = param(*this, 0);
      const double r = param(*this, 1, 1.0);
      const double p = param(*this, 2, 4.0);
      if (std::abs(s - c) >= r) break;
      const Taylor y = (Taylor::variable(1, order, 0, s) - c) * (1.0 / r);
      d = from_jet1(fields::pow(1.0 - y * y, p), order);
      break;
    }
    case Kind::Power: {
      const double p = param(*this, 0, 1.0);
      const bool integral = p >= 0 && std::floor(p) == p;
      if (!integral && !(s > 0)) throw RangeError("Profile::power: non-positive base");
      double coef = 1.0;
      for (int k = 0; k <= order; ++k) {
        d[static_cast<std::size_t>(k)] = coef == 0.0 ? 0.0 : coef * std::pow(s, p - k);
        coef *= p - k;
      }
      break;
    }
  }
  return d;
}

int Profile::smoothness() const {
  if (kind == Kind::Bump) {
    const int p = static_cast<int>(param(*this, 2, 4.0));
    return std::clamp(p - 1, 0, kMaxOrder);
  }
  return kMaxOrder;
}

bool Profile::is_constant() const {
  if (kind == Kind::One) return true;
  if (kind == Kind::Poly) {
    for (std::size_t m = 1; m < params.size(); ++m)
      if (params[m] != 0.0) return false;
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// AnalyticFn

AnalyticFn::AnalyticFn(int n, std::vector<Term> terms, std::string label)
    : n_(n), terms_(std::move(terms)), label_(std::move(label)) {
  if (n < 1 || n > kMaxSpaceDim) throw PreconditionError("AnalyticFn: spatial dimension must be 1 or 2");
  const auto dim = static_cast<std::size_t>(n + 1);
  for (auto& term : terms_) {
    std::visit(
        [&](auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, SeparableTerm>) {
            if (t.factors.size() > dim) throw PreconditionError("AnalyticFn: too many separable factors");
            t.factors.resize(dim);
          } else if constexpr (std::is_same_v<T, RidgeTerm>) {
            if (t.direction.size() > dim) throw PreconditionError("AnalyticFn: ridge direction too long");
            t.direction.resize(dim, 0.0);
          } else if constexpr (std::is_same_v<T, RadialTerm>) {
            if (t.center.size() > static_cast<std::size_t>(n)) throw PreconditionError("AnalyticFn: radial center too long");
            t.center.resize(static_cast<std::size_t>(n), 0.0);
          } else {
            if (t.q.empty()) t.q.assign(dim * dim, 0.0);
            if (t.b.empty()) t.b.assign(dim, 0.0);
            if (t.q.size() != dim * dim || t.b.size() != dim)
              throw PreconditionError("AnalyticFn: exp-quadratic shape mismatch");
            for (std::size_t i = 0; i < dim; ++i)
              for (std::size_t k = 0; k < i; ++k)
                if (t.q[i * dim + k] != t.q[k * dim + i])
                  throw PreconditionError("AnalyticFn: exp-quadratic matrix must be symmetric");
          }
        },
        term);
  }
}

AnalyticFn AnalyticFn::zero(int n) { return AnalyticFn(n, {}, "0"); }

AnalyticFn AnalyticFn::constant(int n, double c) {
  if (c == 0.0) return zero(n);
  return AnalyticFn(n, {SeparableTerm{c, {}}}, "const");
}

AnalyticFn AnalyticFn::coordinate(int n, int var) {
  if (var < 0 || var > n) throw PreconditionError("AnalyticFn::coordinate: variable out of range");
  std::vector<double> k(static_cast<std::size_t>(n + 1), 0.0);
  k[static_cast<std::size_t>(var)] = 1.0;
  return AnalyticFn(n, {RidgeTerm{1.0, k, 0.0, Profile::poly({0.0, 1.0})}}, var == 0 ? "t" : "x" + std::to_string(var));
}

int AnalyticFn::max_order() const {
  int o = kMaxOrder;
  for (const auto& t : terms_) o = std::min(o, term_order(t));
  return o;
}

bool AnalyticFn::is_time_independent() const {
  for (const auto& term : terms_) {
    const bool indep = std::visit(
        [](const auto& t) -> bool {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, SeparableTerm>) {
            return t.factors.empty() || t.factors[0].is_constant();
          } else if constexpr (std::is_same_v<T, RidgeTerm>) {
            return t.direction[0] == 0.0 || t.profile.is_constant();
          } else if constexpr (std::is_same_v<T, RadialTerm>) {
            return true;
          } else {
            const std::size_t dim = t.b.size();
            if (t.b[0] != 0.0) return false;
            for (std::size_t k = 0; k < dim; ++k)
              if (t.q[k] != 0.0) return false;
            return true;
          }
        },
        term);
    if (!indep) return false;
  }
  return true;
}

double AnalyticFn::value(double t, std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_) throw PreconditionError("AnalyticFn: point dimension mismatch");
  std::array<double, kMaxVars> z{t, 0.0, 0.0};
  for (int i = 0; i < n_; ++i) z[static_cast<std::size_t>(i + 1)] = x[static_cast<std::size_t>(i)];
  const auto dim = static_cast<std::size_t>(n_ + 1);
  double sum = 0.0;
  for (const auto& term : terms_) {
    sum += std::visit(
        [&](const auto& tm) -> double {
          using T = std::decay_t<decltype(tm)>;
          if constexpr (std::is_same_v<T, SeparableTerm>) {
            double v = tm.coef;
            for (std::size_t i = 0; i < tm.factors.size(); ++i)
              if (tm.factors[i].kind != Profile::Kind::One) v *= tm.factors[i].value(z[i]);
            return v;
          } else if constexpr (std::is_same_v<T, RidgeTerm>) {
            double s = tm.offset;
            for (std::size_t i = 0; i < dim; ++i) s += tm.direction[i] * z[i];
            return tm.coef * tm.profile.value(s);
          } else if constexpr (std::is_same_v<T, RadialTerm>) {
            double r2 = 0.0;
            for (std::size_t i = 0; i < tm.center.size(); ++i) {
              const double d = z[i + 1] - tm.center[i];
              r2 += d * d;
            }
            return tm.coef * tm.profile.value(std::sqrt(r2));
          } else {
            double e = tm.c;
            for (std::size_t i = 0; i < dim; ++i) {
              e += tm.b[i] * z[i];
              for (std::size_t k = 0; k < dim; ++k) e += 0.5 * tm.q[i * dim + k] * z[i] * z[k];
            }
            return tm.coef * std::exp(e);
          }
        },
        term);
  }
  return sum;
}

Taylor AnalyticFn::jet(const Point& p, int order) const {
  if (p.n() != n_) throw PreconditionError("AnalyticFn: point dimension mismatch");
  if (order > max_order())
    throw CapabilityError("AnalyticFn '" + label_ + "': derivatives of order " + std::to_string(order) +
                          " are not available (smoothness " + std::to_string(max_order()) + ")");
  const int dim = n_ + 1;
  std::array<Taylor, kMaxVars> z;
  z[0] = Taylor::variable(dim, order, 0, p.t);
  for (int i = 0; i < n_; ++i)
    z[static_cast<std::size_t>(i + 1)] = Taylor::variable(dim, order, i + 1, p.x[static_cast<std::size_t>(i)]);
  Taylor sum(dim, order);
  for (const auto& term : terms_) {
    sum += std::visit(
        [&](const auto& tm) -> Taylor {
          using T = std::decay_t<decltype(tm)>;
          if constexpr (std::is_same_v<T, SeparableTerm>) {
            Taylor v = Taylor::constant(dim, order, tm.coef);
            for (std::size_t i = 0; i < tm.factors.size(); ++i) {
              const Profile& f = tm.factors[i];
              if (f.kind == Profile::Kind::One) continue;
              v = v * z[i].compose(f.derivatives(z[i].value(), order));
            }
            return v;
          } else if constexpr (std::is_same_v<T, RidgeTerm>) {
            Taylor s = Taylor::constant(dim, order, tm.offset);
            for (std::size_t i = 0; i < static_cast<std::size_t>(dim); ++i) s += tm.direction[i] * z[i];
            return tm.coef * s.compose(tm.profile.derivatives(s.value(), order));
          } else if constexpr (std::is_same_v<T, RadialTerm>) {
            Taylor r2(dim, order);
            for (std::size_t i = 0; i < tm.center.size(); ++i) {
              const Taylor d = z[i + 1] - tm.center[i];
              r2 += d * d;
            }
            if (!(r2.value() > 0.0)) throw RangeError("AnalyticFn: radial term differentiated at its center");
            const Taylor r = sqrt(r2);
            return tm.coef * r.compose(tm.profile.derivatives(r.value(), order));
          } else {
            Taylor e = Taylor::constant(dim, order, tm.c);
            const auto d = static_cast<std::size_t>(dim);
            for (std::size_t i = 0; i < d; ++i) {
              e += tm.b[i] * z[i];
              for (std::size_t k = 0; k < d; ++k)
                if (tm.q[i * d + k] != 0.0) e += (0.5 * tm.q[i * d + k]) * (z[i] * z[k]);
            }
            return tm.coef * exp(e);
          }
        },
        term);
  }
  return sum;
}

Jet2 AnalyticFn::jet2(const Point& p) const { return Jet2::from_taylor(jet(p, 2)); }

AnalyticFn& AnalyticFn::operator+=(const AnalyticFn& o) {
  if (o.n_ != n_) throw PreconditionError("AnalyticFn: dimension mismatch in sum");
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  if (label_.empty() || label_ == "0") {
    label_ = o.label_;
  } else if (!o.label_.empty() && o.label_ != "0") {
    label_ += "+" + o.label_;
  }
  return *this;
}

AnalyticFn AnalyticFn::scaled(double s) const {
  AnalyticFn out = *this;
  for (auto& term : out.terms_) std::visit([s](auto& t) { t.coef *= s; }, term);
  return out;
}

// ---------------------------------------------------------------------------
// Registry

namespace {

AnalyticFn random_polynomial(RandomStream& rng, int n, double scale) {
  std::vector<Term> terms;
  const int count = 3;
  for (int k = 0; k < count; ++k) {
    SeparableTerm s;
    s.coef = scale;
    for (int v = 0; v <= n; ++v) {
      std::vector<double> c(3);
      for (auto& ci : c) ci = rng.uniform(-1.0, 1.0);
      s.factors.push_back(Profile::poly(c));
    }
    terms.emplace_back(std::move(s));
  }
  return AnalyticFn(n, std::move(terms), "poly");
}

AnalyticFn random_expquad(RandomStream& rng, int n, double scale) {
  const auto dim = static_cast<std::size_t>(n + 1);
  ExpQuadTerm e;
  e.coef = scale * rng.uniform(0.5, 1.5);
  e.q.assign(dim * dim, 0.0);
  e.b.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    e.b[i] = rng.uniform(-0.5, 0.5);
    for (std::size_t k = i; k < dim; ++k) {
      const double v = rng.uniform(-0.5, 0.5);
      e.q[i * dim + k] = v;
      e.q[k * dim + i] = v;
    }
  }
  e.c = rng.uniform(-0.2, 0.2);
  return AnalyticFn(n, {e}, "expquad");
}

AnalyticFn random_trig(RandomStream& rng, int n, double scale) {
  SeparableTerm s;
  s.coef = scale * rng.uniform(0.5, 1.5);
  for (int v = 0; v <= n; ++v) {
    const double a = rng.uniform(0.5, 2.0);
    const double b = rng.uniform(0.0, 2.0 * std::numbers::pi);
    s.factors.push_back(rng.uniform() < 0.5 ? Profile::sin(a, b) : Profile::cos(a, b));
  }
  return AnalyticFn(n, {s}, "trig");
}

}  // namespace

AnalyticFn random_builtin(RandomStream& rng, int n, Family family, double scale) {
  switch (family) {
    case Family::Polynomial:
      return random_polynomial(rng, n, scale);
    case Family::ExpQuadratic:
      return random_expquad(rng, n, scale);
    case Family::TrigProduct:
      return random_trig(rng, n, scale);
    case Family::Mixed:
      break;
  }
  AnalyticFn f = random_polynomial(rng, n, scale / 3.0);
  f += random_expquad(rng, n, scale / 3.0);
  f += random_trig(rng, n, scale / 3.0);
  f.set_label("mixed");
  return f;
}

std::vector<AnalyticFn> builtin_catalog(int n) {
  const auto dim = static_cast<std::size_t>(n + 1);
  std::vector<AnalyticFn> out;
  RandomStream rng(20240611, 0);
  out.push_back(random_builtin(rng, n, Family::Polynomial));
  out.push_back(random_builtin(rng, n, Family::ExpQuadratic));
  out.push_back(random_builtin(rng, n, Family::TrigProduct));
  out.push_back(random_builtin(rng, n, Family::Mixed));

  std::vector<double> k(dim, 0.0);
  k[0] = -1.0;
  k[1] = 1.0;
  out.emplace_back(n, std::vector<Term>{RidgeTerm{1.0, k, 0.0, Profile::sin(std::numbers::pi)}}, "plane_wave");
  out.emplace_back(n, std::vector<Term>{RidgeTerm{1.0, k, 0.1, Profile::gauss(4.0, 0.0)}}, "gauss_pulse");
  out.emplace_back(n, std::vector<Term>{RadialTerm{1.0, std::vector<double>(static_cast<std::size_t>(n), -3.0),
                                                   Profile::power(1.0)}},
                   "distance");
  SeparableTerm e;
  e.factors.push_back(Profile::exp(0.7, 0.0));
  out.emplace_back(n, std::vector<Term>{e}, "exp_t");
  return out;
}

}  // namespace carleman::fields
