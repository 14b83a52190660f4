#include "carleman/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "carleman/errors.hpp"

namespace carleman::fields {
namespace {

std::size_t upper_index(int dim, int i, int j) {
  if (i > j) std::swap(i, j);
  // rows 0..i-1 contribute dim, dim-1, ... entries
  return static_cast<std::size_t>(i * dim - i * (i - 1) / 2 + (j - i));
}

}  // namespace

SymMatrix::SymMatrix(int dim) : dim_(dim), upper_(static_cast<std::size_t>(dim * (dim + 1) / 2), 0.0) {
  if (dim < 1) throw PreconditionError("SymMatrix: dimension must be positive");
}

SymMatrix SymMatrix::identity(int dim) {
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
  return m;
}

double SymMatrix::operator()(int i, int j) const { return upper_[upper_index(dim_, i, j)]; }

void SymMatrix::set(int i, int j, double v) { upper_[upper_index(dim_, i, j)] = v; }

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  if (o.dim_ != dim_) throw PreconditionError("SymMatrix: dimension mismatch");
  for (std::size_t k = 0; k < upper_.size(); ++k) upper_[k] += o.upper_[k];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (auto& v : upper_) v *= s;
  return *this;
}

double SymMatrix::quadratic_form(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != dim_) throw PreconditionError("SymMatrix: vector length mismatch");
  double q = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) q += y[static_cast<std::size_t>(i)] * (*this)(i, j) * y[static_cast<std::size_t>(j)];
  return q;
}

double SymMatrix::max_abs() const {
  double m = 0.0;
  for (double v : upper_) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> eigenvalues(const SymMatrix& m, double tol) {
  const int n = m.dim();
  std::vector<double> a(static_cast<std::size_t>(n * n));
  auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i * n + j)]; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) at(i, j) = m(i, j);

  const double scale = std::max(m.max_abs(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    if (std::sqrt(off) <= tol * scale) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (at(p, q) == 0.0) continue;
        // Rotation zeroing a_pq (Golub & Van Loan, Alg. 8.4.1).
        const double tau = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = at(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

std::vector<double> polyfit(std::span<const double> x, std::span<const double> y, int degree) {
  const std::size_t m = x.size();
  const auto cols = static_cast<std::size_t>(degree + 1);
  if (degree < 0 || y.size() != m || m < cols) throw PreconditionError("polyfit: need at least degree+1 samples");
  double s = 0.0;
  for (double xi : x) s = std::max(s, std::abs(xi));
  if (s == 0.0) s = 1.0;

  // Vandermonde in z = x / s, column major.
  std::vector<double> a(m * cols);
  std::vector<double> b(y.begin(), y.end());
  for (std::size_t i = 0; i < m; ++i) {
    double p = 1.0;
    for (std::size_t j = 0; j < cols; ++j) {
      a[j * m + i] = p;
      p *= x[i] / s;
    }
  }
  for (std::size_t k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) norm += a[k * m + i] * a[k * m + i];
    norm = std::sqrt(norm);
    if (norm == 0.0) throw PreconditionError("polyfit: rank-deficient design");
    const double alpha = a[k * m + k] > 0 ? -norm : norm;
    std::vector<double> v(m, 0.0);
    for (std::size_t i = k; i < m; ++i) v[i] = a[k * m + i];
    v[k] -= alpha;
    double vv = 0.0;
    for (std::size_t i = k; i < m; ++i) vv += v[i] * v[i];
    if (vv == 0.0) continue;
    for (std::size_t j = k; j < cols; ++j) {
      double d = 0.0;
      for (std::size_t i = k; i < m; ++i) d += v[i] * a[j * m + i];
      d *= 2.0 / vv;
      for (std::size_t i = k; i < m; ++i) a[j * m + i] -= d * v[i];
    }
    double d = 0.0;
    for (std::size_t i = k; i < m; ++i) d += v[i] * b[i];
    d *= 2.0 / vv;
    for (std::size_t i = k; i < m; ++i) b[i] -= d * v[i];
  }
  std::vector<double> c(cols);
  for (std::size_t k = cols; k-- > 0;) {
    double acc = b[k];
    for (std::size_t j = k + 1; j < cols; ++j) acc -= a[j * m + k] * c[j];
    c[k] = acc / a[k * m + k];
  }
  double sk = 1.0;
  for (std::size_t k = 0; k < cols; ++k) {
    c[k] /= sk;
    sk *= s;
  }
  return c;
}

}  // namespace carleman::fields
