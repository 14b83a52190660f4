#pragma once

#include <array>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "carleman/rng.hpp"
#include "carleman/taylor.hpp"

namespace carleman::fields {

inline constexpr int kMaxSpaceDim = 2;

/// Space-time point (t, x_1..x_n).
struct Point {
  double t = 0.0;
  std::vector<double> x;

  int n() const { return static_cast<int>(x.size()); }
};

/// Value, gradient and Hessian of a scalar function of (t, x).
/// hess_xx is stored as an upper triangle so it is symmetric by construction.
struct Jet2 {
  int n = 1;
  double value = 0.0;
  double grad_t = 0.0;
  std::array<double, kMaxSpaceDim> grad_x{};
  double hess_tt = 0.0;
  std::array<double, kMaxSpaceDim> hess_tx{};
  std::array<double, 3> hess_xx_upper{};  // (0,0), (0,1), (1,1)

  double hess_xx(int j, int k) const;
  void set_hess_xx(int j, int k, double v);

  static Jet2 from_taylor(const Taylor& tj);
};

/// Univariate building block with closed-form derivatives of any order.
struct Profile {
  enum class Kind {
    One,       // 1
    Poly,      // sum_k p[k] s^k
    Sin,       // sin(p0 s + p1)
    Cos,       // cos(p0 s + p1)
    Exp,       // exp(p0 s + p1)
    Gauss,     // exp(-p0 (s - p1)^2)
    Bump,      // (1 - ((s - p0)/p1)^2)^p2 on |s - p0| < p1, else 0
    Power,     // s^p0
  };
  Kind kind = Kind::One;
  std::vector<double> params;

  /// f^{(k)}(s) for k = 0..order.
  std::array<double, kMaxOrder + 1> derivatives(double s, int order) const;
  double value(double s) const { return derivatives(s, 0)[0]; }
  /// Highest derivative order that is continuous everywhere (capped at kMaxOrder).
  int smoothness() const;
  bool is_constant() const;

  static Profile one() { return {}; }
  static Profile poly(std::vector<double> coeffs) { return {Kind::Poly, std::move(coeffs)}; }
  static Profile sin(double a, double b = 0.0) { return {Kind::Sin, {a, b}}; }
  static Profile cos(double a, double b = 0.0) { return {Kind::Cos, {a, b}}; }
  static Profile exp(double a, double b = 0.0) { return {Kind::Exp, {a, b}}; }
  static Profile gauss(double a, double c = 0.0) { return {Kind::Gauss, {a, c}}; }
  static Profile bump(double c, double r, int p) { return {Kind::Bump, {c, r, static_cast<double>(p)}}; }
  static Profile power(double p) { return {Kind::Power, {p}}; }
};

/// coef * prod_i f_i(z_i), one factor per variable (t first).
struct SeparableTerm {
  double coef = 1.0;
  std::vector<Profile> factors;
};

/// coef * f(k . z + offset).
struct RidgeTerm {
  double coef = 1.0;
  std::vector<double> direction;
  double offset = 0.0;
  Profile profile;
};

/// coef * f(|x - center|), spatial radius only. Not differentiable at the center.
struct RadialTerm {
  double coef = 1.0;
  std::vector<double> center;
  Profile profile;
};

/// coef * exp(z^T Q z / 2 + b . z + c), Q symmetric (row-major dim x dim).
struct ExpQuadTerm {
  double coef = 1.0;
  std::vector<double> q;
  std::vector<double> b;
  double c = 0.0;
};

using Term = std::variant<SeparableTerm, RidgeTerm, RadialTerm, ExpQuadTerm>;

/// Closed-form scalar function of (t, x) carried with exact derivatives up to
/// order four. A function is a sum of terms from the families above.
class AnalyticFn {
 public:
  AnalyticFn() = default;
  AnalyticFn(int n, std::vector<Term> terms, std::string label = {});

  static AnalyticFn zero(int n);
  static AnalyticFn constant(int n, double c);
  /// The coordinate function: var 0 is t, var i >= 1 is x_i.
  static AnalyticFn coordinate(int n, int var);

  int n() const { return n_; }
  int dim() const { return n_ + 1; }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }
  const std::vector<Term>& terms() const { return terms_; }

  int max_order() const;
  bool is_zero() const { return terms_.empty(); }
  bool is_time_independent() const;

  double value(double t, std::span<const double> x) const;
  double value(const Point& p) const { return value(p.t, p.x); }
  /// Exact Taylor jet of the requested order; CapabilityError past max_order().
  Taylor jet(const Point& p, int order) const;
  Jet2 jet2(const Point& p) const;

  AnalyticFn& operator+=(const AnalyticFn& o);
  AnalyticFn scaled(double s) const;
  friend AnalyticFn operator+(AnalyticFn a, const AnalyticFn& b) { return a += b; }

 private:
  int n_ = 1;
  std::vector<Term> terms_;
  std::string label_;
};

/// Random member of the built-in registry: polynomials, exponentials of
/// quadratics, trigonometric products and mixtures of them. `scale` bounds
/// the coefficient size so values stay O(scale) on the unit box.
enum class Family { Polynomial, ExpQuadratic, TrigProduct, Mixed };
AnalyticFn random_builtin(RandomStream& rng, int n, Family family, double scale = 1.0);

/// Fixed, named members of the registry used by the jet-consistency checks.
std::vector<AnalyticFn> builtin_catalog(int n);

}  // namespace carleman::fields
