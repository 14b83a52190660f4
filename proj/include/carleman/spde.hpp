#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carleman/analytic.hpp"
#include "carleman/grid.hpp"
#include "carleman/rng.hpp"

namespace carleman::spde {

using fields::AnalyticFn;
using fields::BrownianPath;
using fields::Field;
using fields::Grid;

/// Scalar coefficient over (t, x). Either a closed-form function or any
/// callable; the flags let the solver skip work for zero or frozen fields.
class ScalarFn {
 public:
  using Fn = std::function<double(double, std::span<const double>)>;

  ScalarFn() = default;
  ScalarFn(const AnalyticFn& f);  // NOLINT(google-explicit-constructor)
  ScalarFn(Fn fn, bool time_independent, std::string label = "custom");
  static ScalarFn constant(double c);

  bool is_zero() const { return zero_; }
  bool is_time_independent() const { return time_independent_; }
  const std::string& label() const { return label_; }
  double operator()(double t, std::span<const double> x) const { return zero_ ? 0.0 : fn_(t, x); }

 private:
  Fn fn_;
  bool zero_ = true;
  bool time_independent_ = true;
  std::string label_ = "0";
};

/// du_t - lap_scale * Lap u dt = (a1 u_t + a2.grad u + a3 u + source) dt + (b1 u_t + b2 u + f) dW.
/// `source` is a deterministic drift forcing used for manufactured solutions;
/// `laplacian_scale` exists only to decouple nodes in scalar-mode checks.
struct Coefficients {
  ScalarFn a1, a3, b1, b2, f, source;
  std::vector<ScalarFn> a2;  // empty or one per axis
  double laplacian_scale = 1.0;
  /// Sup-norm bound for b1 used by the stability guard and the non-degeneracy
  /// bookkeeping; 0 means "take the maximum over the initial grid samples".
  double b1_bound = 0.0;
  /// Lower bound |b1| >= c1 claimed by the configuration (0 when not claimed).
  double b1_lower = 0.0;
};

struct WaveState {
  Field u;
  Field ut;
  double time = 0.0;
};

struct FieldPath {
  std::vector<WaveState> snapshots;
  std::vector<int> snapshot_steps;
  BrownianPath path;
  /// Per step k (only with record_diffusion): sigma_k = b1 ut + b2 u + f at
  /// the start of the step, and the realized increment ut_{k+1} - ut_k.
  std::vector<Field> diffusion;
  std::vector<Field> ut_increments;
};

struct SolveOptions {
  int stride = 1;
  bool check_support = true;
  bool record_diffusion = false;
  /// A first-interior-layer value above this fraction of the field maximum
  /// counts as the support reaching the boundary.
  double leak_threshold = 1e-12;
  /// Inhomogeneous Dirichlet data for u (manufactured-solution runs only).
  std::optional<ScalarFn> boundary_u;
};

/// Coefficients sampled on a grid, resampled per step only when time dependent.
class Stepper {
 public:
  Stepper(const Coefficients& c, const Grid& g);

  const Grid& grid() const { return grid_; }
  /// ut' = ut + dt (lap u + a1 ut + a2.grad u + a3 u + source) + sigma dW,
  /// u' = u + dt ut'. Boundary nodes stay at zero (or boundary_u).
  /// Throws BlowUpError naming `step_index` on a non-finite value.
  WaveState step(const WaveState& s, double dW, int step_index, Field* sigma_out = nullptr,
                 const std::optional<ScalarFn>& boundary_u = std::nullopt);
  double b1_sup() const { return b1_sup_; }

 private:
  struct Sampled {
    const ScalarFn* fn = nullptr;
    Field values;
    bool active = false;
  };
  void refresh(Sampled& s, double t, bool force);

  Coefficients c_;
  Grid grid_;
  Sampled a1_, a3_, b1_, b2_, f_, source_;
  std::vector<Sampled> a2_;
  double b1_sup_ = 0.0;
};

/// One step from scratch (builds a Stepper; use Stepper in loops).
WaveState step(const WaveState& s, const Coefficients& c, double dW, const Grid& g, int step_index = 0);

/// Checks CFL (via the grid), the noise guard dt <= 0.1 / |b1|_inf^2 and the
/// initial support margin of ceil(t_max / dx) nodes, then steps through the path.
FieldPath solve(const WaveState& init, const Coefficients& c, const Grid& g, const BrownianPath& path,
                const SolveOptions& opt = {});

/// g = u_tt - Lap u - a1 u_t - a2.grad u - a3 u, so u_exact solves the drift part with source g.
ScalarFn manufactured_forcing(const AnalyticFn& u_exact, const Coefficients& c);

/// Exact data (u, u_t) at time t. With `staggered`, u_t is taken at t - dt/2,
/// which is the velocity the scheme carries; this makes it second order in time.
WaveState exact_state(const AnalyticFn& u_exact, const Grid& g, double t, bool staggered = false);

/// (1/2) sum of trapezoid-weighted cell volumes times |grad u|^2 + u_t^2 + u^2.
/// Gradients are central inside and one-sided on the boundary.
double total_energy(const WaveState& s);

/// Trapezoid weight of a node (product over axes of 1 or 1/2) times dx^n.
double node_weight(const Grid& g, std::size_t flat);
/// Gradient of u at a node, central in the interior, one-sided on faces.
std::array<double, fields::kMaxSpaceDim> node_gradient(const Field& u, std::size_t flat);

/// Discrete L2 norm of a - b with trapezoid weights.
double l2_distance(const Field& a, const Field& b);

}  // namespace carleman::spde
