#include "carleman/inequality.hpp"

#include <algorithm>
#include <cmath>

#include "carleman/errors.hpp"

namespace carleman::verify {
namespace {

using fields::Point;
using fields::Taylor;

struct Axis {
  double lo = 0.0;
  double h = 0.0;
  int cells = 0;

  double at(int i) const { return lo + i * h; }
  double weight(int i) const { return (i == 0 || i == cells) ? 0.5 * h : h; }
};

Axis make_axis(fields::Bounds b, double h) {
  if (!(b.hi > b.lo) || !(h > 0)) throw ConfigError("inequality region: empty interval or non-positive spacing");
  Axis a;
  a.lo = b.lo;
  a.cells = std::max(2, static_cast<int>(std::lround((b.hi - b.lo) / h)));
  a.h = (b.hi - b.lo) / a.cells;
  return a;
}

// Iterates the tensor grid of the region; `edge` marks nodes on its boundary.
template <class F>
void for_each_node(const std::vector<Axis>& axes, F&& body) {
  std::vector<int> idx(axes.size(), 0);
  for (;;) {
    Point p;
    p.t = axes[0].at(idx[0]);
    double w = axes[0].weight(idx[0]);
    bool edge = idx[0] == 0 || idx[0] == axes[0].cells;
    for (std::size_t a = 1; a < axes.size(); ++a) {
      p.x.push_back(axes[a].at(idx[a]));
      w *= axes[a].weight(idx[a]);
      edge = edge || idx[a] == 0 || idx[a] == axes[a].cells;
    }
    body(p, w, edge);
    std::size_t a = axes.size();
    while (a-- > 0) {
      if (++idx[a] <= axes[a].cells) break;
      idx[a] = 0;
      if (a == 0) return;
    }
  }
}

}  // namespace

std::string to_string(GapPreset p) {
  switch (p) {
    case GapPreset::T32:
      return "T3.2";
    case GapPreset::T42:
      return "T4.2";
    case GapPreset::T51:
      return "T5.1";
    case GapPreset::T62:
      return "T6.2";
  }
  return "?";
}

GapPreset parse_gap_preset(const std::string& s) {
  if (s == "T3.2") return GapPreset::T32;
  if (s == "T4.2") return GapPreset::T42;
  if (s == "T5.1") return GapPreset::T51;
  if (s == "T6.2") return GapPreset::T62;
  throw ConfigError("unknown inequality preset '" + s + "' (expected T3.2, T4.2, T5.1 or T6.2)");
}

std::vector<GapRow> inequality_gap(const GapSetup& s, const std::vector<double>& lambdas) {
  const int n = s.manufactured.n();
  if (static_cast<int>(s.region.x.size()) != n) throw ConfigError("inequality region: dimension mismatch");
  std::vector<Axis> axes{make_axis(s.region.t, s.region.h)};
  for (const auto& b : s.region.x) axes.push_back(make_axis(b, s.region.h));

  // Support: the manufactured function must vanish on the patch boundary.
  double vmax = 0.0, edge_max = 0.0;
  for_each_node(axes, [&](const Point& p, double, bool edge) {
    const double m = std::abs(s.manufactured.value(p));
    vmax = std::max(vmax, m);
    if (edge) edge_max = std::max(edge_max, m);
  });
  if (edge_max > 1e-14 * std::max(vmax, 1e-300) && edge_max > 0)
    throw SupportError("inequality_gap: manufactured function is nonzero (" + std::to_string(edge_max) +
                       ") on the region boundary");

  std::vector<GapRow> rows;
  for (double lam : lambdas) {
    weights::WeightParams wp = s.params;
    wp.lambda = lam;
    GapRow row;
    row.lambda = lam;
    if (s.is_w) {
      double lmax = -INFINITY;
      for_each_node(axes, [&](const Point& p, double, bool) {
        lmax = std::max(lmax, lam * weights::eval_frame(s.rho, p, wp, s.varrho).phi.value());
      });
      row.log_scale = 2.0 * lmax;
    }
    const double g = wp.gamma, mu = wp.mu;
    for_each_node(axes, [&](const Point& p, double w, bool) {
      const weights::CarlemanFrame f = weights::eval_frame(s.rho, p, wp, s.varrho);
      const Taylor mj = s.manufactured.jet(p, 2);
      const Taylor v = s.is_w ? fields::exp(f.ell - 0.5 * row.log_scale) * mj : mj;
      const double vv = v.value(), vt = v.d1(0);
      if (vv == 0.0 && vt == 0.0) {
        bool zero = true;
        for (int j = 1; j <= n; ++j) zero = zero && v.d1(j) == 0.0;
        if (zero) return;
      }
      const Taylor& l = f.ell;
      const double Psi = f.Psi.value();
      double lap = 0.0, gv2 = 0.0, hess_form = 0.0, mixed = 0.0, I = -2.0 * l.d1(0) * vt + Psi * vv;
      for (int j = 1; j <= n; ++j) {
        lap += l.d2(j, j);
        gv2 += v.d1(j) * v.d1(j);
        mixed += l.d2(0, j) * v.d1(j);
        I += 2.0 * l.d1(j) * v.d1(j);
        for (int k = 1; k <= n; ++k) hess_form += l.d2(j, k) * v.d1(j) * v.d1(k);
      }
      const double ltt = l.d2(0, 0);
      const double energy =
          (ltt + lap - Psi) * vt * vt + (ltt - lap + Psi) * gv2 + 2.0 * hess_form - 4.0 * mixed * vt;
      const weights::DQuantities d = weights::eval_D(f);
      const double phi_t = f.phi.d1(0);
      const double lt = l.d1(0);
      const double diff = (s.b2 - s.b1 * lt) * vv + s.b1 * vt;
      const double v2 = vv * vv, vt2 = vt * vt;

      double lhs = 0.0, rhs = 0.0;
      switch (s.preset) {
        case GapPreset::T32: {
          const fields::Jet2 r = f.rho_jet();
          std::vector<double> dv{vt};
          double flux = r.grad_t * vt;
          for (int j = 0; j < n; ++j) {
            dv.push_back(v.d1(j + 1));
            flux -= r.grad_x[static_cast<std::size_t>(j)] * v.d1(j + 1);
          }
          const double psi = f.psi.value();
          const double qm = weights::build_M(r, f.varrho.value()).quadratic_form(dv);
          lhs = energy + d.B * v2 + I * I;
          rhs = 2.0 * lam * g * g * psi * flux * flux + 2.0 * lam * g * psi * qm - 10.0 * lam * mu * vt2 +
                2.0 * lam * mu * gv2 + lam * lam * lam * (d.D2 + d.D3) * v2 + I * I;
          break;
        }
        case GapPreset::T42:
          lhs = energy + d.B * v2 + lt * diff * diff;
          rhs = g * s.c0 * s.c1 * s.c1 / 4.0 * lam * vt2 +
                g * g * g * std::pow(s.c0, 3) * s.c1 * s.c1 / 4.0 * lam * lam * lam * v2;
          break;
        case GapPreset::T51: {
          const double bl = s.b2 - s.b1 * lt;
          lhs = energy + d.B * v2 - 3.0 * lam * std::abs(phi_t) * (bl * bl * v2 + s.b1 * s.b1 * vt2);
          rhs = s.delta * (lam * vt2 + lam * lam * lam * v2);
          break;
        }
        case GapPreset::T62: {
          const double psi = f.psi.value();
          const double tau = p.t - wp.t0;
          const double a = s.alpha;
          lhs = energy + d.B * v2 + lt * diff * diff;
          rhs = lam * lam * lam * psi * psi * psi *
                    (0.5 * a * a * a * tau * tau * tau * s.c1 * s.c1 + 32.0 * s.c3 - 16.0 * a * tau * tau) * v2 +
                lam * psi * (2.0 * (a - 2.0) + 0.5 * a * tau * s.c1 * s.c1) * vt2;
          break;
        }
      }
      row.lhs += w * lhs;
      row.rhs += w * rhs;
    });
    row.gap = row.lhs - row.rhs;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace carleman::verify
