#include "carleman/cone.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "carleman/errors.hpp"
#include "carleman/parallel.hpp"

namespace carleman::cone {
namespace {

const double kSqrt15 = std::sqrt(1.5);

double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

void check_alpha(double alpha) {
  if (!(alpha > 0 && alpha <= 1)) throw InputError("cone: alpha must lie in (0, 1]");
}

// Unit directions: {+1, -1} in 1-D, `count` equally spaced angles (offset by `phase`) in 2-D.
std::vector<std::vector<double>> directions(int n, int count, double phase) {
  std::vector<std::vector<double>> out;
  if (n == 1) return {{1.0}, {-1.0}};
  for (int i = 0; i < count; ++i) {
    const double a = phase + 2.0 * std::numbers::pi * i / count;
    out.push_back({std::cos(a), std::sin(a)});
  }
  return out;
}

std::string describe(const Point& p) {
  std::ostringstream os;
  os.precision(17);
  os << "(t=" << p.t;
  for (std::size_t i = 0; i < p.x.size(); ++i) os << ", x" << i << "=" << p.x[i];
  os << ")";
  return os.str();
}

}  // namespace

double c3_constant(double alpha, double c1) {
  check_alpha(alpha);
  if (!(c1 > 0)) throw InputError("c3_constant: c1 must be positive");
  const double c14 = c1 * c1 * c1 * c1;
  const double a = 8.0 * (alpha - 2.0) * (alpha - 2.0) / (c14 * alpha);
  const double b = 32.0 * 32.0 / (2.0 * c14 * alpha * alpha * alpha);
  return std::max(a, b) + 1.0;
}

ConeSpec ConeSpec::q0(double t0, std::vector<double> x0, double alpha) {
  ConeSpec c;
  c.kind = ConeKind::Q0;
  c.t0 = t0;
  c.apex = std::move(x0);
  c.alpha = alpha;
  c.validate();
  return c;
}

ConeSpec ConeSpec::q1(double t0, std::vector<double> x1, double alpha, double c3) {
  ConeSpec c;
  c.kind = ConeKind::Q1;
  c.t0 = t0;
  c.apex = std::move(x1);
  c.alpha = alpha;
  c.offset = c3;
  c.validate();
  return c;
}

void ConeSpec::validate() const {
  check_alpha(alpha);
  if (!(offset >= 0)) throw InputError("cone: offset must be non-negative");
  if (kind == ConeKind::Q0 && offset != 0.0) throw InputError("cone: Q0 has zero offset");
  if (apex.empty()) throw InputError("cone: apex has no coordinates");
}

double ConeSpec::expression(const Point& p) const {
  const double dt = p.t - t0;
  const double r2 = dist2(p.x, apex);
  return kind == ConeKind::Q0 ? alpha * dt * dt - r2 : 0.5 * alpha * dt * dt - r2 - offset;
}

double ConeSpec::scale(const Point& p) const {
  const double dt = p.t - t0;
  return std::max({alpha * dt * dt, dist2(p.x, apex), offset});
}

std::string to_string(Membership m) {
  switch (m) {
    case Membership::Inside:
      return "inside";
    case Membership::Boundary:
      return "boundary";
    case Membership::Outside:
      return "outside";
  }
  return "?";
}

Membership membership(const Point& p, const ConeSpec& c, double tol) {
  if (p.x.size() != c.apex.size()) throw InputError("membership: dimension mismatch");
  if (p.t < c.t0) return Membership::Outside;
  const double e = c.expression(p);
  const double band = tol * std::max(1.0, c.scale(p));
  if (std::abs(e) <= band) return Membership::Boundary;
  return e > 0 ? Membership::Inside : Membership::Outside;
}

Vertex vertex(double t0, std::span<const double> x0, std::span<const double> x1, double alpha, double c3) {
  check_alpha(alpha);
  if (x0.size() != x1.size() || x0.empty()) throw GeometryError("vertex: apex dimensions differ");
  if (!(c3 > 0)) throw GeometryError("vertex: c3 must be positive");
  const double d2 = dist2(x0, x1);
  if (std::abs(d2 - 4.0 * c3) > 1e-9 * 4.0 * c3)
    throw GeometryError("vertex: |x1 - x0|^2 = " + std::to_string(d2) + " differs from 4 c3 = " +
                        std::to_string(4.0 * c3));
  Vertex v;
  const double k = kSqrt15 - 1.0;
  v.T0 = std::sqrt(4.0 * c3 / alpha * (kSqrt15 - 2.0) * (kSqrt15 - 2.0));
  v.t2 = t0 + v.T0;
  for (std::size_t i = 0; i < x0.size(); ++i) v.x2.push_back(x1[i] + k * (x0[i] - x1[i]));
  v.X0 = std::sqrt(dist2(x1, v.x2));
  const double a = alpha * v.T0 * v.T0;
  v.residual_q0 = std::abs(a - dist2(v.x2, x0)) / std::max(1.0, a);
  v.residual_q1 = std::abs(0.5 * a - dist2(v.x2, x1) - c3) / std::max(1.0, c3);
  return v;
}

ConeScales cone_scales(double alpha, double c1) {
  ConeScales s;
  s.alpha = alpha;
  s.c1 = c1;
  s.c3 = c3_constant(alpha, c1);
  s.D = 2.0 * std::sqrt(s.c3);
  const std::vector<double> x0{0.0}, x1{s.D};
  const Vertex v = vertex(0.0, x0, x1, alpha, s.c3);
  s.T0 = v.T0;
  s.X0 = v.X0;
  return s;
}

double min_intersection_time(double t0, std::span<const double> x0, std::span<const double> x1, double alpha,
                             double c3, int samples) {
  const int n = static_cast<int>(x0.size());
  if (n < 1 || n > 2) throw GeometryError("min_intersection_time: supports n = 1 or 2");
  const double D = std::sqrt(dist2(x0, x1));
  const double tau_max = (2.0 + kSqrt15) * D / std::sqrt(alpha) * 1.01;
  const int angles = n == 1 ? 2 : std::max(4, static_cast<int>(std::sqrt(static_cast<double>(samples) / 10.0)));
  const int times = std::max(2, samples / angles);
  const ConeSpec q1 = ConeSpec::q1(t0, {x1.begin(), x1.end()}, alpha, c3);
  double best = INFINITY;
  for (const auto& w : directions(n, angles, 0.0)) {
    for (int i = 0; i < times; ++i) {
      const double tau = tau_max * i / (times - 1);
      Point p{t0 + tau, {}};
      for (int j = 0; j < n; ++j) p.x.push_back(x0[static_cast<std::size_t>(j)] + std::sqrt(alpha) * tau * w[static_cast<std::size_t>(j)]);
      if (membership(p, q1) != Membership::Outside) best = std::min(best, p.t);
    }
  }
  return best;
}

SweepResult sweep_cover(double alpha, double c1, double target_T, double radius, const SweepOptions& opt) {
  if (opt.n < 1 || opt.n > 2) throw ConfigError("sweep: n must be 1 or 2");
  if (!(opt.spacing > 0 && opt.spacing < 1)) throw ConfigError("sweep: spacing must lie in (0, 1)");
  if (opt.base_times < 1 || opt.directions < 1) throw ConfigError("sweep: sample counts must be positive");
  SweepResult res;
  res.scales = cone_scales(alpha, c1);
  const ConeScales& sc = res.scales;
  const double sa = std::sqrt(alpha);
  if (!(target_T >= sc.T0)) throw InputError("sweep: target_T must be at least T0 = " + std::to_string(sc.T0));
  // A request that is a whole number of steps up to rounding does not take an extra step.
  res.steps = std::max(0, static_cast<int>(std::ceil((radius - sa * sc.T0) / sc.X0 - 1e-9)));

  const int n = opt.n;
  const ConeSpec origin = ConeSpec::q0(0.0, std::vector<double>(static_cast<std::size_t>(n), 0.0), alpha);
  const double tau_max = (2.0 + kSqrt15) * sc.D / sa * 1.01;
  const int times = static_cast<int>(std::ceil(1.0 / opt.spacing)) + 1;
  const auto omegas = directions(n, static_cast<int>(std::ceil(2.0 * std::numbers::pi / opt.spacing)), 0.0);
  const auto es = directions(n, opt.directions, 0.0);
  const double q = kSqrt15 - 1.0;

  for (int step = 1; step <= res.steps; ++step) {
    const double prior_offset = (step - 1) * sc.X0;
    auto in_prior = [&](const Point& p) {
      if (membership(p, origin) != Membership::Outside) return true;
      if (step == 1) return false;
      const double slack = 1e-12 * std::max(1.0, sa * p.t + prior_offset);
      return p.t >= sc.T0 - 1e-12 * sc.T0 && norm(p.x) <= sa * p.t + prior_offset + slack;
    };

    struct Outcome {
      std::size_t samples = 0;
      double min_time = INFINITY;
      double max_excess = -INFINITY;
      std::optional<std::string> failure;
    };
    const std::size_t bases = static_cast<std::size_t>(opt.base_times) * es.size();
    std::vector<Outcome> out(bases);
    parallel_for(
        bases,
        [&](std::size_t idx) {
          Outcome& o = out[idx];
          const std::size_t bi = idx / es.size();
          const auto& e = es[idx % es.size()];
          const double s = opt.base_times == 1 ? 0.0 : (target_T - sc.T0) * static_cast<double>(bi) / (opt.base_times - 1);
          // Base point on the boundary of the previous zero region; y points along the first axis.
          std::vector<double> y(static_cast<std::size_t>(n), 0.0);
          y[0] = prior_offset + sa * s;
          std::vector<double> x1 = y;
          for (int j = 0; j < n; ++j) x1[static_cast<std::size_t>(j)] += sc.D * e[static_cast<std::size_t>(j)];
          const ConeSpec q0 = ConeSpec::q0(s, y, alpha);
          const ConeSpec q1 = ConeSpec::q1(s, x1, alpha, sc.c3);

          for (const auto& w : omegas) {
            for (int i = 0; i < times && !o.failure; ++i) {
              const double tau = tau_max * i / (times - 1);
              Point p{s + tau, y};
              for (int j = 0; j < n; ++j) p.x[static_cast<std::size_t>(j)] += sa * tau * w[static_cast<std::size_t>(j)];
              if (membership(p, q1) == Membership::Outside) continue;
              ++o.samples;
              o.min_time = std::min(o.min_time, p.t);
              if (!in_prior(p))
                o.failure = "step " + std::to_string(step) + ": hypothesis sample " + describe(p) +
                            " lies outside the certified region";
            }
          }

          for (int i = -3; i <= 3 && !o.failure; ++i) {
            const double k = 0.9 * q * i / 3.0;
            Point p{s + sc.T0, y};
            for (int j = 0; j < n; ++j) p.x[static_cast<std::size_t>(j)] += (1.0 - k) * sc.D * e[static_cast<std::size_t>(j)];
            if (membership(p, q1) != Membership::Inside || membership(p, q0) != Membership::Outside)
              o.failure = "step " + std::to_string(step) + ": witness " + describe(p) + " is not in Q1 minus Q0";
            o.max_excess = std::max(o.max_excess, norm(p.x) - sa * p.t - step * sc.X0);
          }

          // Radial coverage along e = y/|y| at time s + T0, from the prior boundary to the new one.
          const bool aligned = n == 1 ? e[0] > 0 : (e[0] == 1.0);
          if (aligned && !o.failure) {
            const double t = s + sc.T0;
            const double r_lo = sa * t + prior_offset, r_hi = sa * t + step * sc.X0;
            for (int i = 0; i <= times && !o.failure; ++i) {
              Point p{t, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
              p.x[0] = r_lo + (r_hi - r_lo) * i / times;
              if (!in_prior(p) && membership(p, q1) == Membership::Outside)
                o.failure = "step " + std::to_string(step) + ": point " + describe(p) + " is not covered";
            }
          }
        },
        opt.threads);

    SweepState st;
    st.step = step;
    st.T0 = sc.T0;
    st.X0 = sc.X0;
    st.radius_at_T0 = sa * sc.T0 + step * sc.X0;
    st.min_surface_time = INFINITY;
    st.max_witness_radius = -INFINITY;
    for (const auto& o : out) {
      if (o.failure) throw GeometryError("sweep: " + *o.failure);
      st.surface_samples += o.samples;
      st.min_surface_time = std::min(st.min_surface_time, o.min_time);
      st.max_witness_radius = std::max(st.max_witness_radius, o.max_excess);
    }
    res.states.push_back(st);
  }
  return res;
}

}  // namespace carleman::cone
