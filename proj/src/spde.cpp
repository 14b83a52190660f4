#include "carleman/spde.hpp"

#include <algorithm>
#include <cmath>

#include "carleman/errors.hpp"

namespace carleman::spde {

ScalarFn::ScalarFn(const AnalyticFn& f)
    : zero_(f.is_zero()), time_independent_(f.is_time_independent()), label_(f.label()) {
  if (!zero_) fn_ = [f](double t, std::span<const double> x) { return f.value(t, x); };
}

ScalarFn::ScalarFn(Fn fn, bool time_independent, std::string label)
    : fn_(std::move(fn)), zero_(false), time_independent_(time_independent), label_(std::move(label)) {}

ScalarFn ScalarFn::constant(double c) {
  if (c == 0.0) return {};
  return ScalarFn([c](double, std::span<const double>) { return c; }, true, std::to_string(c));
}

// ---------------------------------------------------------------------------

Stepper::Stepper(const Coefficients& c, const Grid& g) : c_(c), grid_(g) {
  if (!c_.a2.empty() && static_cast<int>(c_.a2.size()) != g.n)
    throw ConfigError("coefficients: a2 needs one component per axis");
  a1_.fn = &c_.a1;
  a3_.fn = &c_.a3;
  b1_.fn = &c_.b1;
  b2_.fn = &c_.b2;
  f_.fn = &c_.f;
  source_.fn = &c_.source;
  a2_.resize(c_.a2.size());
  for (std::size_t i = 0; i < c_.a2.size(); ++i) a2_[i].fn = &c_.a2[i];
  for (Sampled* s : {&a1_, &a3_, &b1_, &b2_, &f_, &source_}) refresh(*s, 0.0, true);
  for (auto& s : a2_) refresh(s, 0.0, true);
  b1_sup_ = b1_.active ? b1_.values.max_abs() : 0.0;
}

void Stepper::refresh(Sampled& s, double t, bool force) {
  s.active = !s.fn->is_zero();
  if (!s.active) return;
  if (!force && s.fn->is_time_independent()) return;
  if (s.values.size() != grid_.node_count()) s.values = Field(grid_);
  for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] = (*s.fn)(t, grid_.position(i));
}

WaveState Stepper::step(const WaveState& s, double dW, int step_index, Field* sigma_out,
                        const std::optional<ScalarFn>& boundary_u) {
  const Grid& g = grid_;
  const double t = s.time;
  for (Sampled* c : {&a1_, &a3_, &b1_, &b2_, &f_, &source_}) refresh(*c, t, false);
  for (auto& c : a2_) refresh(c, t, false);
  if (b1_.active) b1_sup_ = std::max(b1_sup_, b1_.values.max_abs());

  WaveState out{Field(g), Field(g), t + g.dt};
  if (sigma_out != nullptr) *sigma_out = Field(g);
  const double inv_dx2 = 1.0 / (g.dx * g.dx);
  const double inv_2dx = 0.5 / g.dx;
  const std::size_t count = g.node_count();
  std::array<std::size_t, fields::kMaxSpaceDim> stride{};
  for (int a = 0; a < g.n; ++a) stride[static_cast<std::size_t>(a)] = g.stride(a);

  for (std::size_t i = 0; i < count; ++i) {
    if (g.boundary_distance(i) < 1) continue;
    const double u = s.u[i];
    const double ut = s.ut[i];
    double lap = 0.0;
    for (int a = 0; a < g.n; ++a) {
      const std::size_t st = stride[static_cast<std::size_t>(a)];
      lap += s.u[i + st] - 2.0 * u + s.u[i - st];
    }
    double drift = c_.laplacian_scale * lap * inv_dx2;
    if (a1_.active) drift += a1_.values[i] * ut;
    if (a3_.active) drift += a3_.values[i] * u;
    if (source_.active) drift += source_.values[i];
    for (std::size_t a = 0; a < a2_.size(); ++a)
      if (a2_[a].active) drift += a2_[a].values[i] * (s.u[i + stride[a]] - s.u[i - stride[a]]) * inv_2dx;
    double sigma = 0.0;
    if (b1_.active) sigma += b1_.values[i] * ut;
    if (b2_.active) sigma += b2_.values[i] * u;
    if (f_.active) sigma += f_.values[i];
    if (sigma_out != nullptr) (*sigma_out)[i] = sigma;

    const double ut_new = ut + g.dt * drift + sigma * dW;
    const double u_new = u + g.dt * ut_new;
    if (!std::isfinite(ut_new) || !std::isfinite(u_new))
      throw BlowUpError("solver blew up at step " + std::to_string(step_index) + " (t = " + std::to_string(t) + ")");
    out.ut[i] = ut_new;
    out.u[i] = u_new;
  }
  if (boundary_u) {
    for (std::size_t i = 0; i < count; ++i) {
      if (g.boundary_distance(i) >= 1) continue;
      out.u[i] = (*boundary_u)(out.time, g.position(i));
      out.ut[i] = (out.u[i] - s.u[i]) / g.dt;
    }
  }
  return out;
}

WaveState step(const WaveState& s, const Coefficients& c, double dW, const Grid& g, int step_index) {
  Stepper st(c, g);
  return st.step(s, dW, step_index);
}

namespace {

double max_abs_pair(const WaveState& s) { return std::max(s.u.max_abs(), s.ut.max_abs()); }

void check_leak(const WaveState& s, double threshold, int step_index) {
  const Grid& g = s.u.grid();
  const double scale = max_abs_pair(s);
  if (scale == 0.0) return;
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    if (g.boundary_distance(i) != 1) continue;
    if (std::abs(s.u[i]) > threshold * scale || std::abs(s.ut[i]) > threshold * scale)
      throw PropagationError("support reached the boundary layer at step " + std::to_string(step_index) +
                             " (t = " + std::to_string(s.time) + ")");
  }
}

}  // namespace

FieldPath solve(const WaveState& init, const Coefficients& c, const Grid& g, const BrownianPath& path,
                const SolveOptions& opt) {
  if (init.u.size() != g.node_count() || init.ut.size() != g.node_count())
    throw PreconditionError("solve: initial state does not match the grid");
  if (static_cast<int>(path.steps()) < g.steps || std::abs(path.dt - g.dt) > 1e-12 * g.dt)
    throw PreconditionError("solve: Brownian path does not match the grid time step");
  if (opt.stride < 1) throw ConfigError("solve: stride must be positive");

  Stepper st(c, g);
  const double b1 = c.b1_bound > 0 ? c.b1_bound : st.b1_sup();
  if (b1 > 0 && g.dt > 0.1 / (b1 * b1))
    throw ConfigError("solve: dt = " + std::to_string(g.dt) + " exceeds the noise guard 0.1/|b1|^2 = " +
                      std::to_string(0.1 / (b1 * b1)));

  if (opt.check_support) {
    const int margin = static_cast<int>(std::ceil(g.t_max / g.dx - 1e-9));
    const double scale = max_abs_pair(init);
    for (std::size_t i = 0; i < init.u.size(); ++i) {
      if (g.boundary_distance(i) > margin) continue;
      if (std::abs(init.u[i]) > opt.leak_threshold * scale || std::abs(init.ut[i]) > opt.leak_threshold * scale)
        throw PropagationError("solve: initial data within " + std::to_string(margin) +
                               " nodes of the boundary; the support would reach it before t_max");
    }
  }

  FieldPath out;
  out.path = path;
  out.snapshots.push_back(init);
  out.snapshot_steps.push_back(0);
  WaveState cur = init;
  for (int k = 0; k < g.steps; ++k) {
    Field sigma;
    WaveState next = st.step(cur, path.increments[static_cast<std::size_t>(k)], k,
                             opt.record_diffusion ? &sigma : nullptr, opt.boundary_u);
    if (opt.record_diffusion) {
      Field inc = next.ut;
      for (std::size_t i = 0; i < inc.size(); ++i) inc[i] -= cur.ut[i];
      out.diffusion.push_back(std::move(sigma));
      out.ut_increments.push_back(std::move(inc));
    }
    // Recompute the time from the step count so snapshot times do not drift.
    next.time = init.time + (k + 1) * g.dt;
    if (opt.check_support) check_leak(next, opt.leak_threshold, k + 1);
    cur = std::move(next);
    if ((k + 1) % opt.stride == 0 || k + 1 == g.steps) {
      out.snapshots.push_back(cur);
      out.snapshot_steps.push_back(k + 1);
    }
  }
  return out;
}

ScalarFn manufactured_forcing(const AnalyticFn& u_exact, const Coefficients& c) {
  const int n = u_exact.n();
  bool time_indep = u_exact.is_time_independent();
  for (const ScalarFn* s : {&c.a1, &c.a3})
    time_indep = time_indep && s->is_time_independent();
  for (const auto& s : c.a2) time_indep = time_indep && s.is_time_independent();
  const Coefficients cc = c;
  return ScalarFn(
      [u_exact, cc, n](double t, std::span<const double> x) {
        const fields::Point p{t, {x.begin(), x.end()}};
        const fields::Taylor j = u_exact.jet(p, 2);
        double g = j.d2(0, 0) - cc.a1(t, x) * j.d1(0) - cc.a3(t, x) * j.value();
        for (int a = 1; a <= n; ++a) g -= cc.laplacian_scale * j.d2(a, a);
        for (std::size_t a = 0; a < cc.a2.size(); ++a) g -= cc.a2[a](t, x) * j.d1(static_cast<int>(a) + 1);
        return g;
      },
      time_indep, "manufactured");
}

WaveState exact_state(const AnalyticFn& u_exact, const Grid& g, double t, bool staggered) {
  WaveState s{Field(g), Field(g), t};
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    const fields::Point p{t, g.position(i)};
    const fields::Taylor j = u_exact.jet(p, staggered ? 2 : 1);
    s.u[i] = j.value();
    s.ut[i] = staggered ? j.d1(0) - 0.5 * g.dt * j.d2(0, 0) : j.d1(0);
  }
  return s;
}

double node_weight(const Grid& g, std::size_t flat) {
  const auto idx = g.unflatten(flat);
  double w = g.cell_volume();
  for (int a = 0; a < g.n; ++a) {
    const int i = idx[static_cast<std::size_t>(a)];
    if (i == 0 || i == g.nodes[static_cast<std::size_t>(a)] - 1) w *= 0.5;
  }
  return w;
}

std::array<double, fields::kMaxSpaceDim> node_gradient(const Field& u, std::size_t flat) {
  const Grid& g = u.grid();
  const auto idx = g.unflatten(flat);
  std::array<double, fields::kMaxSpaceDim> grad{};
  for (int a = 0; a < g.n; ++a) {
    const std::size_t st = g.stride(a);
    const int i = idx[static_cast<std::size_t>(a)];
    const int last = g.nodes[static_cast<std::size_t>(a)] - 1;
    double d;
    if (last == 0) {
      d = 0.0;
    } else if (i == 0) {
      d = (u[flat + st] - u[flat]) / g.dx;
    } else if (i == last) {
      d = (u[flat] - u[flat - st]) / g.dx;
    } else {
      d = (u[flat + st] - u[flat - st]) / (2.0 * g.dx);
    }
    grad[static_cast<std::size_t>(a)] = d;
  }
  return grad;
}

double total_energy(const WaveState& s) {
  const Grid& g = s.u.grid();
  double e = 0.0;
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    const auto grad = node_gradient(s.u, i);
    double dens = s.ut[i] * s.ut[i] + s.u[i] * s.u[i];
    for (int a = 0; a < g.n; ++a) dens += grad[static_cast<std::size_t>(a)] * grad[static_cast<std::size_t>(a)];
    e += node_weight(g, i) * dens;
  }
  return 0.5 * e;
}

double l2_distance(const Field& a, const Field& b) {
  if (a.size() != b.size()) throw PreconditionError("l2_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += node_weight(a.grid(), i) * d * d;
  }
  return std::sqrt(s);
}

}  // namespace carleman::spde
