#include "carleman/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "carleman/errors.hpp"

namespace carleman::fields {
namespace {

struct ProductTerm {
  int lhs;
  int rhs;
  int out;
  int degree;
};

struct Tables {
  std::vector<MultiIndex> monos;
  std::array<int, 125> index{};  // (a0, a1, a2) -> slot, -1 when absent
  std::array<int, kMaxOrder + 2> degree_end{};  // monos[0, degree_end[d]) have degree <= d
  std::vector<ProductTerm> products;  // sorted by degree
  std::array<int, kMaxOrder + 2> product_end{};
  std::vector<double> factorial;  // a! per slot
};

int degree_of(const MultiIndex& a) { return a[0] + a[1] + a[2]; }
int key_of(const MultiIndex& a) { return a[0] * 25 + a[1] * 5 + a[2]; }

Tables build_tables(int dim) {
  Tables tb;
  tb.index.fill(-1);
  for (int deg = 0; deg <= kMaxOrder; ++deg) {
    for (int a0 = deg; a0 >= 0; --a0) {
      for (int a1 = deg - a0; a1 >= 0; --a1) {
        const int a2 = deg - a0 - a1;
        MultiIndex m{a0, a1, a2};
        if (dim < 2 && a1 != 0) continue;
        if (dim < 3 && a2 != 0) continue;
        tb.index[key_of(m)] = static_cast<int>(tb.monos.size());
        tb.monos.push_back(m);
      }
    }
    tb.degree_end[deg] = static_cast<int>(tb.monos.size());
  }
  tb.degree_end[kMaxOrder + 1] = tb.degree_end[kMaxOrder];
  const int count = static_cast<int>(tb.monos.size());
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < count; ++j) {
      MultiIndex s{};
      for (int v = 0; v < kMaxVars; ++v) s[v] = tb.monos[i][v] + tb.monos[j][v];
      const int deg = degree_of(s);
      if (deg > kMaxOrder) continue;
      tb.products.push_back({i, j, tb.index[key_of(s)], deg});
    }
  }
  std::stable_sort(tb.products.begin(), tb.products.end(),
                   [](const ProductTerm& a, const ProductTerm& b) { return a.degree < b.degree; });
  for (int deg = 0; deg <= kMaxOrder; ++deg) {
    tb.product_end[deg] = static_cast<int>(
        std::upper_bound(tb.products.begin(), tb.products.end(), deg,
                         [](int d, const ProductTerm& p) { return d < p.degree; }) -
        tb.products.begin());
  }
  for (const auto& m : tb.monos) {
    double f = 1.0;
    for (int v = 0; v < kMaxVars; ++v)
      for (int k = 2; k <= m[v]; ++k) f *= k;
    tb.factorial.push_back(f);
  }
  return tb;
}

const Tables& tables(int dim) {
  static const std::array<Tables, kMaxVars> all = {build_tables(1), build_tables(2), build_tables(3)};
  return all[static_cast<std::size_t>(dim - 1)];
}

int slot(const Tables& tb, const MultiIndex& a) {
  if (a[0] < 0 || a[1] < 0 || a[2] < 0 || degree_of(a) > kMaxOrder) return -1;
  return tb.index[key_of(a)];
}

}  // namespace

int monomial_count(int dim, int order) { return tables(dim).degree_end[order]; }

std::span<const MultiIndex> monomials(int dim) { return tables(dim).monos; }

Taylor::Taylor(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1 || dim > kMaxVars) throw PreconditionError("Taylor: dimension must be 1..3");
  if (order < 0 || order > kMaxOrder) throw CapabilityError("Taylor: order must be 0..4");
}

Taylor Taylor::constant(int dim, int order, double value) {
  Taylor t(dim, order);
  t.c_[0] = value;
  return t;
}

Taylor Taylor::variable(int dim, int order, int var, double at) {
  Taylor t(dim, order);
  t.c_[0] = at;
  if (order >= 1) {
    MultiIndex e{};
    e[static_cast<std::size_t>(var)] = 1;
    t.c_[static_cast<std::size_t>(slot(tables(dim), e))] = 1.0;
  }
  return t;
}

double Taylor::coefficient(const MultiIndex& a) const {
  if (degree_of(a) > order_) return 0.0;
  const int s = slot(tables(dim_), a);
  return s < 0 ? 0.0 : c_[static_cast<std::size_t>(s)];
}

void Taylor::set_coefficient(const MultiIndex& a, double value) {
  const int s = slot(tables(dim_), a);
  if (s < 0 || degree_of(a) > order_) throw PreconditionError("Taylor: coefficient outside stored order");
  c_[static_cast<std::size_t>(s)] = value;
}

double Taylor::derivative(const MultiIndex& a) const {
  const int deg = degree_of(a);
  if (deg > order_) throw CapabilityError("Taylor: derivative of degree " + std::to_string(deg) +
                                          " requested from an order-" + std::to_string(order_) + " jet");
  const auto& tb = tables(dim_);
  const int s = slot(tb, a);
  if (s < 0) return 0.0;
  return c_[static_cast<std::size_t>(s)] * tb.factorial[static_cast<std::size_t>(s)];
}

double Taylor::d1(int var) const {
  MultiIndex a{};
  a[static_cast<std::size_t>(var)] = 1;
  return derivative(a);
}

double Taylor::d2(int var_a, int var_b) const {
  MultiIndex a{};
  a[static_cast<std::size_t>(var_a)] += 1;
  a[static_cast<std::size_t>(var_b)] += 1;
  return derivative(a);
}

Taylor Taylor::diff(int var) const {
  if (order_ == 0) throw CapabilityError("Taylor: cannot differentiate an order-0 jet");
  const auto& tb = tables(dim_);
  Taylor out(dim_, order_ - 1);
  const int count = tb.degree_end[order_ - 1];
  for (int i = 0; i < count; ++i) {
    MultiIndex up = tb.monos[static_cast<std::size_t>(i)];
    up[static_cast<std::size_t>(var)] += 1;
    const int s = slot(tb, up);
    out.c_[static_cast<std::size_t>(i)] = c_[static_cast<std::size_t>(s)] * up[static_cast<std::size_t>(var)];
  }
  return out;
}

Taylor Taylor::truncated(int order) const {
  Taylor out = *this;
  if (order >= order_) return out;
  out.order_ = order;
  const auto& tb = tables(dim_);
  for (int i = tb.degree_end[order]; i < kMaxTerms; ++i) out.c_[static_cast<std::size_t>(i)] = 0.0;
  return out;
}

Taylor Taylor::compose(std::span<const double> derivs) const {
  if (static_cast<int>(derivs.size()) < order_ + 1)
    throw CapabilityError("Taylor::compose: not enough outer derivatives");
  Taylor h = *this;
  h.c_[0] = 0.0;
  double fact = 1.0;
  for (int k = 2; k <= order_; ++k) fact *= k;
  // Horner in h: sum_k f^{(k)}/k! h^k
  Taylor acc = Taylor::constant(dim_, order_, derivs[static_cast<std::size_t>(order_)] / fact);
  for (int k = order_ - 1; k >= 0; --k) {
    fact /= (k + 1);
    acc = acc * h;
    acc.c_[0] += derivs[static_cast<std::size_t>(k)] / fact;
  }
  return acc;
}

Taylor& Taylor::operator+=(const Taylor& o) {
  if (o.dim_ != dim_) throw PreconditionError("Taylor: dimension mismatch");
  order_ = std::min(order_, o.order_);
  const int count = tables(dim_).degree_end[order_];
  for (int i = 0; i < count; ++i) c_[static_cast<std::size_t>(i)] += o.c_[static_cast<std::size_t>(i)];
  for (int i = count; i < kMaxTerms; ++i) c_[static_cast<std::size_t>(i)] = 0.0;
  return *this;
}

Taylor& Taylor::operator-=(const Taylor& o) {
  if (o.dim_ != dim_) throw PreconditionError("Taylor: dimension mismatch");
  order_ = std::min(order_, o.order_);
  const int count = tables(dim_).degree_end[order_];
  for (int i = 0; i < count; ++i) c_[static_cast<std::size_t>(i)] -= o.c_[static_cast<std::size_t>(i)];
  for (int i = count; i < kMaxTerms; ++i) c_[static_cast<std::size_t>(i)] = 0.0;
  return *this;
}

Taylor& Taylor::operator*=(double s) {
  for (auto& v : c_) v *= s;
  return *this;
}

Taylor& Taylor::operator+=(double s) {
  c_[0] += s;
  return *this;
}

Taylor operator*(const Taylor& a, const Taylor& b) {
  if (a.dim_ != b.dim_) throw PreconditionError("Taylor: dimension mismatch");
  const int order = std::min(a.order_, b.order_);
  Taylor out(a.dim_, order);
  const auto& tb = tables(a.dim_);
  const int end = tb.product_end[order];
  for (int p = 0; p < end; ++p) {
    const ProductTerm& t = tb.products[static_cast<std::size_t>(p)];
    out.c_[static_cast<std::size_t>(t.out)] +=
        a.c_[static_cast<std::size_t>(t.lhs)] * b.c_[static_cast<std::size_t>(t.rhs)];
  }
  return out;
}

Taylor exp(const Taylor& g) {
  const double e = std::exp(g.value());
  std::array<double, kMaxOrder + 1> d{};
  d.fill(e);
  return g.compose(d);
}

Taylor pow(const Taylor& g, double p) {
  const double s = g.value();
  std::array<double, kMaxOrder + 1> d{};
  const bool integral = p >= 0 && std::floor(p) == p;
  if (!integral && !(s > 0)) throw RangeError("Taylor::pow: base must be positive for non-integer exponent");
  double coef = 1.0;
  for (int k = 0; k <= g.order(); ++k) {
    const double e = p - k;
    if (coef == 0.0) {
      d[static_cast<std::size_t>(k)] = 0.0;
    } else {
      d[static_cast<std::size_t>(k)] = coef * std::pow(s, e);
    }
    coef *= e;
  }
  return g.compose(d);
}

Taylor sqrt(const Taylor& g) { return pow(g, 0.5); }

}  // namespace carleman::fields
