#pragma once

#include <string>
#include <vector>

#include "carleman/analytic.hpp"
#include "carleman/grid.hpp"
#include "carleman/weights.hpp"

namespace carleman::verify {

/// Inequalities evaluated on a manufactured function over a grid patch:
///   T3.2  weighted identity right side against its lambda-expanded lower bound
///         (the difference is the O(lambda^2) remainder; no sign is asserted),
///   T4.2  local estimate under the parameter choice of choose_gamma_mu,
///   T5.1  the same with the noise term replaced by its worst-case bound
///         -3 lambda |phi_t| ((b2 - b1 ell_t)^2 v^2 + b1^2 v_t^2) and right side delta (lambda v_t^2 + lambda^3 v^2),
///   T6.2  cone weights (mu = 0, gamma = 1, varrho = 2) against the cone lower bound.
enum class GapPreset { T32, T42, T51, T62 };
std::string to_string(GapPreset p);
GapPreset parse_gap_preset(const std::string& s);

struct GapRegion {
  fields::Bounds t;
  std::vector<fields::Bounds> x;
  double h = 0.02;  // node spacing in t and x
};

struct GapSetup {
  GapPreset preset = GapPreset::T42;
  fields::AnalyticFn rho;
  fields::AnalyticFn varrho;
  /// gamma, mu and the center; lambda is taken from the scan list.
  weights::WeightParams params;
  /// Manufactured function: v itself, or w with v = exp(ell - max ell) w when `is_w`.
  fields::AnalyticFn manufactured;
  bool is_w = false;
  double b1 = 1.0;  // constant noise coefficients
  double b2 = 0.0;
  double c0 = 1.0;
  double c1 = 1.0;
  double delta = 0.01;  // T5.1
  double alpha = 0.5;   // T6.2
  double c3 = 0.0;      // T6.2
  GapRegion region;
};

struct GapRow {
  double lambda = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  /// Both sides are multiplied by exp(-log_scale); zero unless `is_w`.
  double log_scale = 0.0;
};

/// Trapezoid integrals of both sides for every lambda. Throws SupportError
/// when the manufactured function is nonzero on the boundary of the region.
std::vector<GapRow> inequality_gap(const GapSetup& setup, const std::vector<double>& lambdas);

}  // namespace carleman::verify
