#pragma once

#include <span>
#include <vector>

namespace carleman::fields {

/// Small dense symmetric matrix. Only the upper triangle is stored, so the
/// matrix is symmetric by construction.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim);

  static SymMatrix identity(int dim);

  int dim() const { return dim_; }
  double operator()(int i, int j) const;
  void set(int i, int j, double v);
  void add(int i, int j, double v) { set(i, j, (*this)(i, j) + v); }

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator*=(double s);
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a += b * -1.0; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }

  /// y^T M y.
  double quadratic_form(std::span<const double> y) const;
  double max_abs() const;

 private:
  int dim_ = 0;
  std::vector<double> upper_;
};

/// Eigenvalues by cyclic Jacobi rotations, sorted ascending. Iterates until
/// the off-diagonal Frobenius norm drops below tol times the matrix scale.
std::vector<double> eigenvalues(const SymMatrix& m, double tol = 1e-12);

/// Least-squares polynomial fit of the given degree. Coefficients are returned
/// lowest degree first. Solved by Householder QR on a rescaled abscissa.
std::vector<double> polyfit(std::span<const double> x, std::span<const double> y, int degree);

}  // namespace carleman::fields
