#include "carleman/grid.hpp"

#include <algorithm>
#include <string>

#include "carleman/errors.hpp"

namespace carleman::fields {
namespace {

// Nearest integer to `ratio` when it is one to a relative tolerance, else -1.
long exact_count(double ratio) {
  const double r = std::round(ratio);
  if (r < 1 || std::abs(ratio - r) > 1e-9 * r) return -1;
  return static_cast<long>(r);
}

}  // namespace

std::size_t Grid::node_count() const {
  std::size_t c = 1;
  for (int a = 0; a < n; ++a) c *= static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)]);
  return c;
}

std::size_t Grid::stride(int axis) const {
  std::size_t s = 1;
  for (int a = n - 1; a > axis; --a) s *= static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)]);
  return s;
}

std::array<int, kMaxSpaceDim> Grid::unflatten(std::size_t flat) const {
  std::array<int, kMaxSpaceDim> idx{};
  for (int a = n - 1; a >= 0; --a) {
    const auto m = static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)]);
    idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % m);
    flat /= m;
  }
  return idx;
}

std::size_t Grid::flatten(const std::array<int, kMaxSpaceDim>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < n; ++a)
    flat = flat * static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)]) +
           static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
  return flat;
}

std::vector<double> Grid::position(std::size_t flat) const {
  const auto idx = unflatten(flat);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) x[static_cast<std::size_t>(a)] = coord(a, idx[static_cast<std::size_t>(a)]);
  return x;
}

int Grid::boundary_distance(std::size_t flat) const {
  const auto idx = unflatten(flat);
  int d = nodes[0];
  for (int a = 0; a < n; ++a) {
    const int i = idx[static_cast<std::size_t>(a)];
    d = std::min({d, i, nodes[static_cast<std::size_t>(a)] - 1 - i});
  }
  return d;
}

Grid make_grid(std::span<const Bounds> bounds, double dx, double dt, double t_max, double cfl) {
  const int n = static_cast<int>(bounds.size());
  if (n < 1 || n > kMaxSpaceDim) throw ConfigError("grid: spatial dimension must be 1 or 2");
  if (!(dx > 0)) throw ConfigError("grid: dx must be positive");
  if (!(dt > 0)) throw ConfigError("grid: dt must be positive");
  if (!(t_max > 0)) throw ConfigError("grid: t_max must be positive");
  const double cfl_max = 1.0 / std::sqrt(static_cast<double>(n));
  if (cfl <= 0) cfl = cfl_max;
  if (cfl > cfl_max * (1 + 1e-12))
    throw ConfigError("grid: cfl " + std::to_string(cfl) + " exceeds 1/sqrt(n) = " + std::to_string(cfl_max));

  Grid g;
  g.n = n;
  g.dx = dx;
  g.dt = dt;
  g.t_max = t_max;
  g.cfl = cfl;
  for (int a = 0; a < n; ++a) {
    const Bounds b = bounds[static_cast<std::size_t>(a)];
    if (!(b.hi > b.lo)) throw ConfigError("grid: empty interval on axis " + std::to_string(a));
    const long cells = exact_count((b.hi - b.lo) / dx);
    if (cells < 0)
      throw ConfigError("grid: axis " + std::to_string(a) + " length is not an integer multiple of dx");
    // Equal spacing on every axis, so the limiting axis is whichever is named first.
    if (dt > cfl * dx * (1 + 1e-12))
      throw ConfigError("grid: CFL violated on axis " + std::to_string(a) + ": dt = " + std::to_string(dt) +
                        " > cfl*dx = " + std::to_string(cfl * dx));
    g.box[static_cast<std::size_t>(a)] = b;
    g.nodes[static_cast<std::size_t>(a)] = static_cast<int>(cells + 1);
  }
  const long steps = exact_count(t_max / dt);
  if (steps < 0) throw ConfigError("grid: t_max is not an integer multiple of dt");
  g.steps = static_cast<int>(steps);
  return g;
}

Field Field::sample(const Grid& g, const AnalyticFn& f, double t) {
  Field out(g);
  for (std::size_t i = 0; i < out.size(); ++i) out.v_[i] = f.value(t, g.position(i));
  return out;
}

Field& Field::operator+=(const Field& o) {
  if (o.size() != size()) throw PreconditionError("Field: size mismatch");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (auto& v : v_) v *= s;
  return *this;
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : v_) m = std::max(m, std::abs(v));
  return m;
}

double fd_apply(const Field& f, Stencil op, std::size_t flat, int axis) {
  const Grid& g = f.grid();
  if (flat >= f.size()) throw StencilError("fd_apply: index out of range");
  if (g.boundary_distance(flat) < 1)
    throw StencilError("fd_apply: node " + std::to_string(flat) + " lies on the boundary");
  if (op == Stencil::Gradient) {
    if (axis < 0 || axis >= g.n) throw StencilError("fd_apply: gradient axis out of range");
    const std::size_t s = g.stride(axis);
    return (f[flat + s] - f[flat - s]) / (2.0 * g.dx);
  }
  double acc = 0.0;
  for (int a = 0; a < g.n; ++a) {
    const std::size_t s = g.stride(a);
    acc += f[flat + s] - 2.0 * f[flat] + f[flat - s];
  }
  return acc / (g.dx * g.dx);
}

double fd_time_second(const Field& prev, const Field& cur, const Field& next, double dt, std::size_t flat) {
  if (flat >= cur.size() || prev.size() != cur.size() || next.size() != cur.size())
    throw StencilError("fd_time_second: index out of range");
  return (next[flat] - 2.0 * cur[flat] + prev[flat]) / (dt * dt);
}

}  // namespace carleman::fields
