#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "carleman/grid.hpp"
#include "carleman/spde.hpp"

namespace carleman::propagation {

using fields::Field;
using fields::Grid;
using spde::WaveState;

struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Closed set K given as a finite union of balls and axis-aligned boxes.
class SupportSet {
 public:
  SupportSet() = default;
  SupportSet(int n, std::vector<Ball> balls, std::vector<Box> boxes);

  int n() const { return n_; }
  const std::vector<Ball>& balls() const { return balls_; }
  const std::vector<Box>& boxes() const { return boxes_; }
  /// Membership in K_r = {x : d_K(x) <= r}.
  bool contains(std::span<const double> x, double r = 0.0) const;

 private:
  int n_ = 1;
  std::vector<Ball> balls_;
  std::vector<Box> boxes_;
};

/// Exact Euclidean distance from x to K (0 inside).
double distance_to_set(std::span<const double> x, const SupportSet& k);

/// rho_m(s) = s^2 / (1 + s^2) for s > 0, else 0. C^1, nondecreasing, zero on s <= 0.
double mollifier(double s);

/// (1/2) sum of node weights * rho_m(d_K(x) - t - halo) * (|grad u|^2 + u_t^2 + u^2).
double local_energy(const WaveState& s, const SupportSet& k, double t, double halo = 0.0);

/// Unweighted energy over nodes with d_K(x) > radius.
double energy_outside(const WaveState& s, const SupportSet& k, double radius);

struct PropagationConfig {
  WaveState init;
  spde::Coefficients coeffs;
  Grid grid;
  SupportSet support;
  int paths = 1;
  std::uint64_t seed = 1;
  int stride = 1;
  int halo_cells = 3;
  /// Worker cap; 0 means "hardware concurrency".
  unsigned threads = 0;
};

struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> mean;           // mollified local energy
  std::vector<double> stderr_;        // standard error of `mean`
  std::vector<double> outside_mean;   // energy outside K_t inflated by the halo
  std::vector<double> outside_stderr;
  std::vector<double> total_mean;     // total energy
  double initial_total = 0.0;
  /// max over paths of max_t E(t) / int_0^t E, the empirical Gronwall constant (0 when E == 0).
  double gronwall_c = 0.0;
  int paths = 0;
};

/// Monte Carlo experiment: every path is solved independently (in parallel)
/// and reduced in path order. Throws InputError when the initial data is not
/// supported in K.
EnergyTrace run_propagation(const PropagationConfig& cfg);

}  // namespace carleman::propagation
