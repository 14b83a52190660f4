#pragma once

#include <span>
#include <string>
#include <vector>

#include "carleman/analytic.hpp"

namespace carleman::cone {

using fields::Point;

/// max{8(alpha-2)^2 / (c1^4 alpha), 32^2 / (2 c1^4 alpha^3)} + 1.
/// alpha = 1 is accepted so the boundary value can serve as an oracle.
double c3_constant(double alpha, double c1);

enum class ConeKind { Q0, Q1 };

/// Q0: t >= t0 and alpha (t-t0)^2 - |x-apex|^2 >= 0.
/// Q1: t >= t0 and alpha/2 (t-t0)^2 - |x-apex|^2 > offset.
struct ConeSpec {
  ConeKind kind = ConeKind::Q0;
  double t0 = 0.0;
  std::vector<double> apex;
  double alpha = 0.5;
  double offset = 0.0;

  static ConeSpec q0(double t0, std::vector<double> x0, double alpha);
  static ConeSpec q1(double t0, std::vector<double> x1, double alpha, double c3);
  void validate() const;
  /// Defining expression; positive inside.
  double expression(const Point& p) const;
  /// Magnitude of the terms entering `expression`, used to scale the boundary tolerance.
  double scale(const Point& p) const;
};

enum class Membership { Inside, Boundary, Outside };
std::string to_string(Membership m);

inline constexpr double kMembershipTol = 1e-12;

/// Outside for t < t0. Otherwise boundary when |expression| <= tol * max(1, scale),
/// inside when the expression is larger, outside when smaller.
Membership membership(const Point& p, const ConeSpec& c, double tol = kMembershipTol);

struct Vertex {
  double t2 = 0.0;
  std::vector<double> x2;
  double T0 = 0.0;  // t2 - t0
  double X0 = 0.0;  // |x1 - x2|
  double residual_q0 = 0.0;  // relative residuals of the two defining equations
  double residual_q1 = 0.0;
};

/// Vertex of the intersection of dQ0(t0, x0) and the closure of Q1(t0, x1).
/// Requires |x1 - x0|^2 = 4 c3 within 1e-9 relative (GeometryError otherwise).
Vertex vertex(double t0, std::span<const double> x0, std::span<const double> x1, double alpha, double c3);

/// Scales of one covering step: D = |x1 - x0| = 2 sqrt(c3), T0 and X0.
struct ConeScales {
  double alpha = 0.0;
  double c1 = 0.0;
  double c3 = 0.0;
  double D = 0.0;
  double T0 = 0.0;
  double X0 = 0.0;
};
ConeScales cone_scales(double alpha, double c1);

/// Smallest sampled time on dQ0(t0, x0) intersected with the closure of
/// Q1(t0, x1), over a mesh of about `samples` points (n = 1 or 2).
double min_intersection_time(double t0, std::span<const double> x0, std::span<const double> x1, double alpha,
                             double c3, int samples = 100000);

struct SweepOptions {
  int n = 2;                  // space dimension, 1 or 2
  double spacing = 1e-2;      // mesh spacing as a fraction of the cone scale
  int base_times = 9;         // base times s in [0, target_T - T0]
  int directions = 16;        // directions of x1 - base point
  unsigned threads = 0;
};

/// Certified-zero region after `step` steps: {t >= T0, |x| <= sqrt(alpha) t + step X0}.
struct SweepState {
  int step = 0;
  double T0 = 0.0;
  double X0 = 0.0;
  double radius_at_T0 = 0.0;
  std::size_t surface_samples = 0;   // hypothesis-surface points checked
  double min_surface_time = 0.0;     // earliest sampled hypothesis time
  double max_witness_radius = 0.0;   // largest |x| - sqrt(alpha) t over witnesses, minus step X0
};

struct SweepResult {
  ConeScales scales;
  int steps = 0;
  std::vector<SweepState> states;
};

/// Schedule covering {T0 <= t <= target_T, |x| <= radius}: the step count is
/// max(0, ceil((radius - sqrt(alpha) T0) / X0 - 1e-9)). Each step samples the
/// hypothesis surfaces dQ0(s, y) ∩ Q1(s, y + D e) for base points with
/// |y| = (step-1) X0 + sqrt(alpha) s and checks they lie in the union of Q0(0, 0)
/// and the previous certified region; it also checks the witnesses
/// (s + T0, y + (1 - k) D e) are in Q1 minus Q0. GeometryError names the first failing sample.
SweepResult sweep_cover(double alpha, double c1, double target_T, double radius, const SweepOptions& opt = {});

}  // namespace carleman::cone
