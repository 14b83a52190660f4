#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "carleman/analytic.hpp"

namespace carleman::fields {

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// Uniform space-time grid on a box. Node i on axis a sits at lo[a] + i*dx.
struct Grid {
  int n = 1;
  double dx = 0.0;
  double dt = 0.0;
  double t_max = 0.0;
  double cfl = 1.0;
  std::array<Bounds, kMaxSpaceDim> box{};
  std::array<int, kMaxSpaceDim> nodes{1, 1};
  int steps = 0;

  std::size_t node_count() const;
  double coord(int axis, int i) const { return box[static_cast<std::size_t>(axis)].lo + i * dx; }
  double cell_volume() const { return std::pow(dx, n); }
  /// Row-major stride of `axis` in the flat index.
  std::size_t stride(int axis) const;
  std::array<int, kMaxSpaceDim> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::array<int, kMaxSpaceDim>& idx) const;
  std::vector<double> position(std::size_t flat) const;
  /// Distance in nodes from the nearest box face (0 on the boundary).
  int boundary_distance(std::size_t flat) const;
};

/// Validates the box, the steps and the CFL bound dt <= cfl*dx with cfl <= 1/sqrt(n).
/// Pass cfl <= 0 to use the default 1/sqrt(n).
Grid make_grid(std::span<const Bounds> bounds, double dx, double dt, double t_max, double cfl = 0.0);

/// Scalar samples on the nodes of a grid, axis 0 slowest.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0) : grid_(g), v_(g.node_count(), fill) {}

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  /// Samples f(t, x) at every node.
  static Field sample(const Grid& g, const AnalyticFn& f, double t);

  Field& operator+=(const Field& o);
  Field& operator*=(double s);
  double max_abs() const;

 private:
  Grid grid_;
  std::vector<double> v_;
};

enum class Stencil { Laplacian, Gradient };

/// Second-order central difference at an interior node. For Gradient, `axis`
/// picks the component. Boundary nodes raise StencilError.
double fd_apply(const Field& f, Stencil op, std::size_t flat, int axis = 0);

/// (next - 2 cur + prev) / dt^2 at one node of three consecutive time levels.
double fd_time_second(const Field& prev, const Field& cur, const Field& next, double dt, std::size_t flat);

}  // namespace carleman::fields
