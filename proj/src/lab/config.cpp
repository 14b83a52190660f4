#include <cmath>

#include "carleman/errors.hpp"
#include "carleman/lab.hpp"

namespace carleman::lab {

Reader::Reader(const json& j, std::string where) : j_(&j), where_(std::move(where)) {
  if (!j.is_object()) throw ConfigError(where_ + ": expected an object");
}

bool Reader::has(const std::string& key) const { return j_->contains(key); }

const json& Reader::raw(const std::string& key) {
  if (!has(key)) throw ConfigError(where_ + ": missing key '" + key + "'");
  used_.insert(key);
  return j_->at(key);
}

double Reader::number(const std::string& key, std::optional<double> fallback) {
  if (!has(key) && fallback) return *fallback;
  const json& v = raw(key);
  if (!v.is_number()) throw ConfigError(where_ + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(where_ + "." + key + ": not finite");
  return d;
}

int Reader::integer(const std::string& key, std::optional<int> fallback) {
  if (!has(key) && fallback) return *fallback;
  const json& v = raw(key);
  if (!v.is_number_integer()) throw ConfigError(where_ + "." + key + ": expected an integer");
  return v.get<int>();
}

std::uint64_t Reader::u64(const std::string& key, std::optional<std::uint64_t> fallback) {
  if (!has(key) && fallback) return *fallback;
  const json& v = raw(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ConfigError(where_ + "." + key + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

bool Reader::boolean(const std::string& key, std::optional<bool> fallback) {
  if (!has(key) && fallback) return *fallback;
  const json& v = raw(key);
  if (!v.is_boolean()) throw ConfigError(where_ + "." + key + ": expected true or false");
  return v.get<bool>();
}

std::string Reader::string(const std::string& key, std::optional<std::string> fallback) {
  if (!has(key) && fallback) return *fallback;
  const json& v = raw(key);
  if (!v.is_string()) throw ConfigError(where_ + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> Reader::numbers(const std::string& key, std::optional<std::vector<double>> fallback) {
  if (!has(key) && fallback) return *fallback;
  const json& v = raw(key);
  if (!v.is_array()) throw ConfigError(where_ + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where_ + "." + key + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Reader Reader::object(const std::string& key) { return Reader(raw(key), where_ + "." + key); }

void Reader::finish() const {
  std::string unknown;
  for (auto it = j_->begin(); it != j_->end(); ++it)
    if (!used_.count(it.key())) unknown += (unknown.empty() ? "" : ", ") + it.key();
  if (!unknown.empty()) throw ConfigError(where_ + ": unknown key(s) " + unknown);
}

fields::Profile parse_profile(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_string())
    throw ConfigError(where + ": a profile is [\"kind\", params...]");
  const std::string kind = j[0].get<std::string>();
  std::vector<double> p;
  for (std::size_t i = 1; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": profile parameters must be numbers");
    p.push_back(j[i].get<double>());
  }
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (p.size() < lo || p.size() > hi)
      throw ConfigError(where + ": profile '" + kind + "' takes " + std::to_string(lo) + "-" + std::to_string(hi) +
                        " parameters");
  };
  auto at = [&](std::size_t i) { return i < p.size() ? p[i] : 0.0; };
  if (kind == "one") return need(0, 0), fields::Profile::one();
  if (kind == "poly") return need(1, 64), fields::Profile::poly(p);
  if (kind == "sin") return need(1, 2), fields::Profile::sin(p[0], at(1));
  if (kind == "cos") return need(1, 2), fields::Profile::cos(p[0], at(1));
  if (kind == "exp") return need(1, 2), fields::Profile::exp(p[0], at(1));
  if (kind == "gauss") return need(1, 2), fields::Profile::gauss(p[0], at(1));
  if (kind == "bump") {
    need(3, 3);
    if (p[2] != std::floor(p[2]) || p[2] < 1) throw ConfigError(where + ": bump power must be a positive integer");
    return fields::Profile::bump(p[0], p[1], static_cast<int>(p[2]));
  }
  if (kind == "power") return need(1, 1), fields::Profile::power(p[0]);
  throw ConfigError(where + ": unknown profile kind '" + kind + "'");
}

namespace {

std::vector<double> sized(Reader& r, const std::string& key, std::size_t size, std::vector<double> fallback) {
  auto v = r.numbers(key, std::move(fallback));
  if (v.size() != size)
    throw ConfigError(r.where() + "." + key + ": expected " + std::to_string(size) + " numbers");
  return v;
}

}  // namespace

fields::AnalyticFn parse_function(const json& j, int n, const std::string& where) {
  using fields::AnalyticFn;
  const auto dim = static_cast<std::size_t>(n + 1);
  if (j.is_number()) return AnalyticFn::constant(n, j.get<double>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "t") return AnalyticFn::coordinate(n, 0);
    for (int i = 1; i <= n; ++i)
      if (s == "x" + std::to_string(i)) return AnalyticFn::coordinate(n, i);
    throw ConfigError(where + ": unknown coordinate '" + s + "'");
  }
  if (!j.is_object() || j.size() != 1) throw ConfigError(where + ": a function is a number, a coordinate or a one-key object");
  const std::string kind = j.begin().key();
  const json& body = j.begin().value();
  const std::string here = where + "." + kind;
  if (kind == "sum") {
    if (!body.is_array()) throw ConfigError(here + ": expected an array");
    AnalyticFn f = AnalyticFn::zero(n);
    for (std::size_t i = 0; i < body.size(); ++i) f += parse_function(body[i], n, here + "[" + std::to_string(i) + "]");
    return f;
  }
  Reader r(body, here);
  const double coef = r.number("coef", 1.0);
  fields::Term term;
  if (kind == "separable") {
    fields::SeparableTerm t{coef, {}};
    const json& fs = r.raw("factors");
    if (!fs.is_array() || fs.size() != dim) throw ConfigError(here + ".factors: expected " + std::to_string(dim) + " profiles");
    for (const auto& p : fs) t.factors.push_back(parse_profile(p, here + ".factors"));
    term = t;
  } else if (kind == "ridge") {
    fields::RidgeTerm t;
    t.coef = coef;
    t.direction = sized(r, "direction", dim, {});
    t.offset = r.number("offset", 0.0);
    t.profile = parse_profile(r.raw("profile"), here + ".profile");
    term = t;
  } else if (kind == "radial") {
    fields::RadialTerm t;
    t.coef = coef;
    t.center = sized(r, "center", static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    t.profile = parse_profile(r.raw("profile"), here + ".profile");
    term = t;
  } else if (kind == "expquad") {
    fields::ExpQuadTerm t;
    t.coef = coef;
    t.q = sized(r, "q", dim * dim, std::vector<double>(dim * dim, 0.0));
    t.b = sized(r, "b", dim, std::vector<double>(dim, 0.0));
    t.c = r.number("c", 0.0);
    term = t;
  } else {
    throw ConfigError(where + ": unknown function kind '" + kind + "'");
  }
  r.finish();
  return AnalyticFn(n, {term}, kind);
}

fields::Grid parse_grid(Reader r) {
  const json& b = r.raw("bounds");
  if (!b.is_array() || b.empty() || b.size() > static_cast<std::size_t>(fields::kMaxSpaceDim))
    throw ConfigError(r.where() + ".bounds: expected 1 or 2 [lo, hi] pairs");
  std::vector<fields::Bounds> bounds;
  for (const auto& e : b) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw ConfigError(r.where() + ".bounds: expected [lo, hi] pairs");
    bounds.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  const double dx = r.number("dx");
  const double dt = r.number("dt");
  const double t_max = r.number("t_max");
  const double cfl = r.number("cfl", 0.0);
  r.finish();
  return fields::make_grid(bounds, dx, dt, t_max, cfl);
}

spde::Coefficients parse_coefficients(Reader r, int n) {
  spde::Coefficients c;
  auto fn = [&](const std::string& key) -> spde::ScalarFn {
    if (!r.has(key)) return {};
    return parse_function(r.raw(key), n, r.where() + "." + key);
  };
  c.a1 = fn("a1");
  c.a3 = fn("a3");
  c.b1 = fn("b1");
  c.b2 = fn("b2");
  c.f = fn("f");
  if (r.has("a2")) {
    const json& a2 = r.raw("a2");
    if (!a2.is_array() || a2.size() != static_cast<std::size_t>(n))
      throw ConfigError(r.where() + ".a2: expected one function per space axis");
    for (std::size_t i = 0; i < a2.size(); ++i)
      c.a2.emplace_back(parse_function(a2[i], n, r.where() + ".a2[" + std::to_string(i) + "]"));
  }
  c.laplacian_scale = r.number("laplacian_scale", 1.0);
  c.b1_bound = r.number("b1_bound", 0.0);
  c.b1_lower = r.number("b1_lower", 0.0);
  r.finish();
  return c;
}

propagation::SupportSet parse_support(Reader r, int n) {
  std::vector<propagation::Ball> balls;
  std::vector<propagation::Box> boxes;
  const auto dim = static_cast<std::size_t>(n);
  if (r.has("balls")) {
    const json& a = r.raw("balls");
    if (!a.is_array()) throw ConfigError(r.where() + ".balls: expected an array");
    for (const auto& e : a) {
      Reader b(e, r.where() + ".balls[]");
      propagation::Ball ball{sized(b, "center", dim, {}), b.number("radius")};
      b.finish();
      balls.push_back(ball);
    }
  }
  if (r.has("boxes")) {
    const json& a = r.raw("boxes");
    if (!a.is_array()) throw ConfigError(r.where() + ".boxes: expected an array");
    for (const auto& e : a) {
      Reader b(e, r.where() + ".boxes[]");
      propagation::Box box{sized(b, "lo", dim, {}), sized(b, "hi", dim, {})};
      b.finish();
      boxes.push_back(box);
    }
  }
  r.finish();
  return propagation::SupportSet(n, balls, boxes);
}

}  // namespace carleman::lab
