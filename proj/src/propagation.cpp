#include "carleman/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "carleman/errors.hpp"
#include "carleman/parallel.hpp"

namespace carleman::propagation {

SupportSet::SupportSet(int n, std::vector<Ball> balls, std::vector<Box> boxes)
    : n_(n), balls_(std::move(balls)), boxes_(std::move(boxes)) {
  if (balls_.empty() && boxes_.empty()) throw InputError("support set: K must be nonempty");
  const auto dim = static_cast<std::size_t>(n);
  for (const auto& b : balls_)
    if (b.center.size() != dim || !(b.radius >= 0)) throw InputError("support set: malformed ball");
  for (const auto& b : boxes_) {
    if (b.lo.size() != dim || b.hi.size() != dim) throw InputError("support set: malformed box");
    for (std::size_t i = 0; i < dim; ++i)
      if (!(b.hi[i] >= b.lo[i])) throw InputError("support set: box with hi < lo");
  }
}

bool SupportSet::contains(std::span<const double> x, double r) const { return distance_to_set(x, *this) <= r; }

double distance_to_set(std::span<const double> x, const SupportSet& k) {
  if (static_cast<int>(x.size()) != k.n()) throw PreconditionError("distance_to_set: dimension mismatch");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : k.balls()) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - b.center[i]) * (x[i] - b.center[i]);
    best = std::min(best, std::max(0.0, std::sqrt(r2) - b.radius));
  }
  for (const auto& b : k.boxes()) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = std::max({b.lo[i] - x[i], 0.0, x[i] - b.hi[i]});
      d2 += e * e;
    }
    best = std::min(best, std::sqrt(d2));
  }
  return best;
}

double mollifier(double s) { return s > 0 ? s * s / (1.0 + s * s) : 0.0; }

namespace {

double energy_density(const WaveState& s, std::size_t i) {
  const auto grad = spde::node_gradient(s.u, i);
  double d = s.ut[i] * s.ut[i] + s.u[i] * s.u[i];
  for (int a = 0; a < s.u.grid().n; ++a) d += grad[static_cast<std::size_t>(a)] * grad[static_cast<std::size_t>(a)];
  return d;
}

std::vector<double> node_distances(const Grid& g, const SupportSet& k) {
  std::vector<double> d(g.node_count());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = distance_to_set(g.position(i), k);
  return d;
}

double local_energy_cached(const WaveState& s, const std::vector<double>& dist, double t, double halo) {
  const Grid& g = s.u.grid();
  double e = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double w = mollifier(dist[i] - t - halo);
    if (w > 0) e += spde::node_weight(g, i) * w * energy_density(s, i);
  }
  return 0.5 * e;
}

double outside_cached(const WaveState& s, const std::vector<double>& dist, double radius) {
  const Grid& g = s.u.grid();
  double e = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (dist[i] > radius) e += spde::node_weight(g, i) * energy_density(s, i);
  return 0.5 * e;
}

}  // namespace

double local_energy(const WaveState& s, const SupportSet& k, double t, double halo) {
  return local_energy_cached(s, node_distances(s.u.grid(), k), t, halo);
}

double energy_outside(const WaveState& s, const SupportSet& k, double radius) {
  return outside_cached(s, node_distances(s.u.grid(), k), radius);
}

EnergyTrace run_propagation(const PropagationConfig& cfg) {
  if (cfg.paths < 1) throw StatisticsError("run_propagation: need at least one path");
  const Grid& g = cfg.grid;
  if (cfg.support.n() != g.n) throw InputError("run_propagation: support set dimension does not match the grid");
  const std::vector<double> dist = node_distances(g, cfg.support);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] > 1e-12 && (cfg.init.u[i] != 0.0 || cfg.init.ut[i] != 0.0))
      throw InputError("run_propagation: initial data is nonzero at distance " + std::to_string(dist[i]) +
                       " from K");
  }
  const double halo = cfg.halo_cells * g.dx;

  struct PathResult {
    std::vector<double> times, local, outside, total;
    double gronwall = 0.0;
  };
  std::vector<PathResult> results(static_cast<std::size_t>(cfg.paths));
  spde::SolveOptions opt;
  opt.stride = cfg.stride;
  parallel_for(
      results.size(),
      [&](std::size_t p) {
        const auto path = fields::sample_brownian(cfg.seed, g.dt, g.t_max, p);
        const auto fp = spde::solve(cfg.init, cfg.coeffs, g, path, opt);
        PathResult& r = results[p];
        double integral = 0.0;
        double prev_t = 0.0, prev_e = 0.0;
        for (std::size_t k = 0; k < fp.snapshots.size(); ++k) {
          const WaveState& s = fp.snapshots[k];
          const double t = s.time - cfg.init.time;
          const double e = local_energy_cached(s, dist, t, halo);
          r.times.push_back(s.time);
          r.local.push_back(e);
          r.outside.push_back(outside_cached(s, dist, t + halo));
          r.total.push_back(spde::total_energy(s));
          if (k > 0) integral += 0.5 * (e + prev_e) * (t - prev_t);
          if (integral > 1e-300) r.gronwall = std::max(r.gronwall, e / integral);
          prev_t = t;
          prev_e = e;
        }
      },
      cfg.threads);

  EnergyTrace tr;
  tr.paths = cfg.paths;
  tr.initial_total = spde::total_energy(cfg.init);
  tr.times = results.front().times;
  const std::size_t m = tr.times.size();
  auto reduce = [&](auto member, std::vector<double>& mean, std::vector<double>* se) {
    mean.assign(m, 0.0);
    std::vector<double> sq(m, 0.0);
    for (const auto& r : results)
      for (std::size_t k = 0; k < m; ++k) {
        const double v = (r.*member)[k];
        mean[k] += v;
        sq[k] += v * v;
      }
    const double np = cfg.paths;
    for (std::size_t k = 0; k < m; ++k) {
      mean[k] /= np;
      if (se != nullptr) {
        const double var = cfg.paths > 1 ? std::max(0.0, (sq[k] - np * mean[k] * mean[k]) / (np - 1)) : 0.0;
        se->push_back(std::sqrt(var / np));
      }
    }
  };
  reduce(&PathResult::local, tr.mean, &tr.stderr_);
  reduce(&PathResult::outside, tr.outside_mean, &tr.outside_stderr);
  reduce(&PathResult::total, tr.total_mean, nullptr);
  for (const auto& r : results) tr.gronwall_c = std::max(tr.gronwall_c, r.gronwall);
  return tr;
}

}  // namespace carleman::propagation
