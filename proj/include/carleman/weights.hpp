#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "carleman/analytic.hpp"
#include "carleman/linalg.hpp"
#include "carleman/taylor.hpp"

namespace carleman::weights {

using fields::AnalyticFn;
using fields::Jet2;
using fields::Point;
using fields::SymMatrix;
using fields::Taylor;

struct WeightParams {
  double lambda = 1.0;
  double gamma = 1.0;
  double mu = 0.0;
  double t0 = 0.0;
  std::vector<double> x0;

  void validate(int n) const;
};

/// Weights at one point, carried as exact Taylor jets:
///   psi = exp(gamma rho), phi = psi - mu (|x - x0|^2 + (t - t0)^2),
///   ell = lambda phi, theta = exp(ell),
///   Psi = Laplacian(ell) - ell_tt + 2 lambda gamma psi varrho + 6 lambda mu,
///   A   = ell_t^2 - ell_tt - |grad ell|^2 + Laplacian(ell) - Psi.
/// rho, psi, phi and ell are order-4 jets; Psi, varrho and A are order 2.
struct CarlemanFrame {
  Point point;
  WeightParams params;
  Taylor rho;
  Taylor varrho;
  Taylor psi;
  Taylor phi;
  Taylor ell;
  Taylor Psi;
  Taylor A;
  double theta = 1.0;

  int n() const { return point.n(); }
  Jet2 rho_jet() const { return Jet2::from_taylor(rho); }
  Jet2 phi_jet() const { return Jet2::from_taylor(phi); }
  Jet2 ell_jet() const { return Jet2::from_taylor(ell); }
};

/// Needs rho with four derivatives and varrho with two. Throws RangeError
/// when exp(lambda*phi) leaves double range.
CarlemanFrame eval_frame(const AnalyticFn& rho, const Point& p, const WeightParams& params,
                         const AnalyticFn& varrho);
CarlemanFrame eval_frame(const AnalyticFn& rho, const Point& p, const WeightParams& params);

/// (1+n)x(1+n) matrix: [[rho_tt - varrho, -grad rho_t^T], [-grad rho_t, varrho I + Hess_x rho]].
SymMatrix build_M(const Jet2& rho, double varrho);

struct DQuantities {
  double P = 0.0;       // psi_t^2 - |grad psi|^2
  double D1 = 0.0;
  double D2 = 0.0;      // matrix form
  double D2_div = 0.0;  // divergence form
  double D2_scale = 0.0;  // sum of the magnitudes of the terms of both D2 forms
  double D3 = 0.0;
  double A = 0.0;
  double B = 0.0;
  /// Leading coefficients predicted for A (lambda^2) and B (lambda^3).
  double A_leading() const { return P + D1; }
  double B_leading() const { return D2 + D3; }
};

/// All quantities at the frame's point. In debug builds a disagreement of the
/// two D2 forms beyond 1e-8 of their scale aborts.
DQuantities eval_D(const CarlemanFrame& f);

/// The flux V (spatial vector) and the time density N, as jets one order
/// below v. v must be at least a first-order jet.
struct VNJets {
  std::vector<Taylor> V;
  Taylor N;
};
VNJets eval_VN(const Taylor& v, const CarlemanFrame& f);

struct VNValues {
  std::vector<double> V;
  double N = 0.0;
};
VNValues eval_VN(const Jet2& v, const CarlemanFrame& f);

// ---------------------------------------------------------------------------
// Positivity certificates

struct PsdCertificate {
  double tau = 0.0;
  double min_eig = 0.0;          // of I - Hess g / tau
  std::vector<double> hess_eigs; // of Hess g at x0
  double tangent_min = 0.0;      // min over sampled tangent y of y^T M~ y / |y|^2 (scaled, see below)
  int tangent_samples = 0;
  int doublings = 0;
};

inline constexpr double kPsdMargin = 1e-9;
inline constexpr double kTauCap = 1048576.0;  // 2^20

/// Smallest eigenvalue of I - Hess g / tau.
double psd_min_eig(const SymMatrix& hess_g, double tau);
bool psd_accepts(const SymMatrix& hess_g, double tau);
SymMatrix spatial_hessian(const AnalyticFn& g, std::span<const double> x0);

/// Doubling search tau = 1, 2, 4, ... for I - Hess g(x0)/tau >= kPsdMargin,
/// then checks the quadratic form of M~ = rho_tt I + Hess_x rho for
/// rho = exp(tau (t - t0)) - exp(tau (g(x) - t0)), t0 = g(x0), on `samples`
/// random unit y orthogonal to grad g(x0). The time shift by t0 rescales M~ by
/// exp(-tau t0) and keeps it finite for large tau. g must be time independent
/// with |grad g(x0)| = 1 within 1e-9.
PsdCertificate psd_certificate(const AnalyticFn& g, std::span<const double> x0, std::uint64_t seed = 1,
                               int samples = 50);

enum class AssumptionPreset { A21, A22, A23 };
std::string to_string(AssumptionPreset p);
AssumptionPreset parse_assumption_preset(const std::string& s);

struct AssumptionReport {
  AssumptionPreset preset = AssumptionPreset::A21;
  std::vector<double> eigenvalues;
  double min_eig = 0.0;
  double rho_t = 0.0;
  double penalty = 0.0;  // 3 |rho_t| |b1|^2 for A2.2, else 0
  bool matrix_ok = false;
  bool rho_t_ok = false;
  bool b1_ok = false;    // 0 < c1 <= |b1|
  bool pass() const { return matrix_ok && rho_t_ok && b1_ok; }
};

/// A2.1: rho_t >= c0, M(varrho) non-negative definite and |b1| >= c1 > 0;
/// A2.2: M(varrho) - penalty I positive definite; A2.3: rho_t >= c0 and
/// M(varrho) positive definite. Clauses a preset does not state report true.
/// Tolerance is 1e-12 of the matrix scale.
AssumptionReport assumption_check(const Jet2& rho, double varrho, AssumptionPreset preset, double c0, double c1,
                                  double b1_norm);

/// Parameters fixed the way the local Carleman estimate needs them at the
/// center: gamma doubles from 1 until D2 >= 0, then mu halves from 1 until
///   c1^2 phi_t^3 / 2 + D2 + D3 >= gamma^3 c0^3 c1^2 / 3  and
///   c1^2 phi_t / 2 - 11 mu >= gamma c0 c1^2 / 3.
struct LemmaChoice {
  double gamma = 1.0;
  double mu = 1.0;
  double D2 = 0.0;
  double D3 = 0.0;
  double phi_t = 0.0;
};
LemmaChoice choose_gamma_mu(const AnalyticFn& rho, const AnalyticFn& varrho, const Point& center, double c0,
                            double c1);

}  // namespace carleman::weights
