#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "carleman/analytic.hpp"
#include "carleman/rng.hpp"
#include "carleman/spde.hpp"
#include "carleman/weights.hpp"

namespace carleman::verify {

using fields::AnalyticFn;
using fields::Point;
using fields::Taylor;
using weights::CarlemanFrame;
using weights::WeightParams;

/// chi = S((phi - c2) / eps) with the quintic smoothstep S(s) = 6s^5 - 15s^4 + 10s^3
/// clamped to [0, 1]. S is C^2, so chi has two continuous derivatives.
struct CutoffSpec {
  double c2 = 0.5;
  double eps = 0.1;

  void validate() const;
  /// S and its first two derivatives with respect to phi.
  std::array<double, 3> profile(double phi) const;
  /// max |d chi / d phi| = 15 / (8 eps) and max |d^2 chi / d phi^2| = 10 / (sqrt(3) eps^2).
  double max_first() const;
  double max_second() const;
  /// chi as a second-order jet, given the jet of phi.
  Taylor jet(const Taylor& phi) const;
};

struct IdentityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  Point point;
  WeightParams params;

  /// pass = |residual| <= tolerance * max(1, |lhs|, |rhs|).
  void finish();
};

/// Pointwise identity with the noise replaced by its deterministic surrogate:
///   theta I (w_tt - Lap w) + div V + d_t N
///     = (ell_tt + Lap ell - Psi) v_t^2 + (ell_tt - Lap ell + Psi) |grad v|^2
///       + 2 sum ell_jk v_j v_k - 4 grad ell_t . grad v v_t + B v^2 + I^2,
/// with v = theta w and I = -2 ell_t v_t + 2 grad ell . grad v + Psi v.
/// Both sides come from exact jets; w needs two derivatives.
IdentityReport identity_residual(const AnalyticFn& w, const AnalyticFn& rho, const AnalyticFn& varrho,
                                 const WeightParams& params, const Point& p, double tol = 1e-8);

/// Conjugation theta (w_tt - Lap w) = v_tt - Lap v + (ell_t^2 - |grad ell|^2) v - (ell_tt - Lap ell) v
///   - 2 ell_t v_t + 2 grad ell . grad v, and the cutoff expansion
/// w_tt - Lap w = chi (u_tt - Lap u) + chi_tt u + 2 chi_t u_t - 2 grad chi . grad u - Lap chi u,
/// for w = chi u.
std::pair<IdentityReport, IdentityReport> conjugation_residual(const AnalyticFn& u, const AnalyticFn& rho,
                                                               const WeightParams& params, const CutoffSpec& cut,
                                                               const Point& p, double tol = 1e-8);

/// A randomized identity case with |lambda phi| <= max_lphi at the point.
struct IdentityCase {
  AnalyticFn w, rho, varrho;
  WeightParams params;
  Point point;
};
IdentityCase random_identity_case(fields::RandomStream& rng, int n, double max_lphi = 20.0);

/// A randomized conjugation case whose point lies strictly inside the cutoff's transition band.
struct ConjugationCase {
  AnalyticFn u, rho;
  WeightParams params;
  CutoffSpec cutoff;
  Point point;
};
ConjugationCase random_conjugation_case(fields::RandomStream& rng, int n, double max_lphi = 20.0);

/// Quadratic-variation bookkeeping over Monte Carlo paths recorded with
/// diffusion samples. Per path the realized sum of theta^2 (Delta u_t)^2 and the
/// model sum of theta^2 sigma^2 dt are integrated over the grid (trapezoid
/// weights). The report compares their path means as a ratio: lhs is
/// realized/model, rhs is 1. theta = exp(log_theta), evaluated at the start of each step.
struct QvReport {
  IdentityReport report;
  double realized_mean = 0.0;
  double model_mean = 0.0;
  double realized_stderr = 0.0;
  int paths = 0;
};
inline constexpr int kMinQvPaths = 100;
QvReport qv_check(std::span<const spde::FieldPath> paths, const AnalyticFn& log_theta, double tol = 0.05,
                  int min_paths = kMinQvPaths);

}  // namespace carleman::verify
