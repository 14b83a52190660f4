#pragma once

#include <array>
#include <span>

namespace carleman::fields {

inline constexpr int kMaxOrder = 4;
inline constexpr int kMaxVars = 3;  // t plus up to two space axes
inline constexpr int kMaxTerms = 35;  // monomials of degree <= 4 in 3 variables

using MultiIndex = std::array<int, kMaxVars>;

/// Truncated multivariate Taylor expansion of a scalar function about a
/// space-time point. Variable 0 is t, variables 1..n are x_1..x_n.
///
/// Coefficients are stored normalized, c_a = (d^a f) / a!, so products are
/// plain truncated polynomial products and every derivative it reports is
/// exact up to rounding. `order()` is the highest degree that is known;
/// differentiating lowers it by one and binary operations keep the minimum.
class Taylor {
 public:
  Taylor() = default;
  Taylor(int dim, int order);

  static Taylor constant(int dim, int order, double value);
  /// The coordinate function z_var, expanded about z_var = at.
  static Taylor variable(int dim, int order, int var, double at);

  int dim() const { return dim_; }
  int order() const { return order_; }

  double value() const { return c_[0]; }
  /// Partial derivative d^a f at the expansion point.
  double derivative(const MultiIndex& a) const;
  /// First derivative along one variable.
  double d1(int var) const;
  /// Mixed second derivative.
  double d2(int var_a, int var_b) const;

  /// Normalized coefficient by multi-index (zero past the stored order).
  double coefficient(const MultiIndex& a) const;
  void set_coefficient(const MultiIndex& a, double value);

  /// Partial derivative as a Taylor object of one lower order.
  Taylor diff(int var) const;
  /// Copy with the order lowered (never raised).
  Taylor truncated(int order) const;

  /// Composition f(g) where derivs[k] = f^{(k)}(g.value()) for k = 0..order.
  Taylor compose(std::span<const double> derivs) const;

  Taylor& operator+=(const Taylor& o);
  Taylor& operator-=(const Taylor& o);
  Taylor& operator*=(double s);
  Taylor& operator+=(double s);

  friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
  friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
  friend Taylor operator*(const Taylor& a, const Taylor& b);
  friend Taylor operator*(Taylor a, double s) { return a *= s; }
  friend Taylor operator*(double s, Taylor a) { return a *= s; }
  friend Taylor operator+(Taylor a, double s) { return a += s; }
  friend Taylor operator+(double s, Taylor a) { return a += s; }
  friend Taylor operator-(Taylor a, double s) { return a += -s; }
  friend Taylor operator-(double s, const Taylor& a) { return (-1.0 * a) + s; }
  Taylor operator-() const { return -1.0 * (*this); }

 private:
  int dim_ = 1;
  int order_ = 0;
  std::array<double, kMaxTerms> c_{};
};

Taylor exp(const Taylor& g);
Taylor sqrt(const Taylor& g);
/// g^p for real p; requires g.value() > 0 unless p is a non-negative integer.
Taylor pow(const Taylor& g, double p);

/// Number of monomials of degree <= order in dim variables.
int monomial_count(int dim, int order);
/// Monomials of degree <= kMaxOrder in dim variables, graded ascending.
std::span<const MultiIndex> monomials(int dim);

}  // namespace carleman::fields
