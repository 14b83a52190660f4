#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "carleman/analytic.hpp"
#include "carleman/grid.hpp"
#include "carleman/propagation.hpp"
#include "carleman/spde.hpp"

namespace carleman::lab {

using json = nlohmann::json;

inline constexpr const char* kArtifactVersion = "1.0.0";

// Tables

using Cell = std::variant<double, std::string>;

/// Long-format table. emit_csv appends the metadata columns config_hash,
/// artifact_version and wall_time_s to every row.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::string config_hash;
  std::string artifact_version = kArtifactVersion;
  double wall_time_s = 0.0;

  void add(std::vector<Cell> row);
};

/// Shortest decimal text that reads back to the same double ('.' separator).
std::string format_double(double v);
/// Header plus rows, RFC 4180 quoting, LF line endings.
std::string to_csv(const ResultTable& t);
/// Throws IoError when the file cannot be written.
void emit_csv(const ResultTable& t, const std::string& path);

/// FNV-1a 64-bit of the canonical (sorted-key, compact) JSON text, as 16 hex digits.
std::string config_hash(const json& config);

// Configuration

/// Object view that records which keys were read; finish() rejects the rest.
class Reader {
 public:
  Reader(const json& j, std::string where);

  bool has(const std::string& key) const;
  const json& raw(const std::string& key);
  double number(const std::string& key, std::optional<double> fallback = std::nullopt);
  int integer(const std::string& key, std::optional<int> fallback = std::nullopt);
  std::uint64_t u64(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt);
  bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt);
  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt);
  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt);
  Reader object(const std::string& key);
  /// ConfigError listing every key that was never read.
  void finish() const;
  const std::string& where() const { return where_; }

 private:
  const json* j_;
  std::string where_;
  std::set<std::string> used_;
};

/// Function grammar over n space variables (t is variable 0):
///   3.5                                   constant
///   "t", "x1", "x2"                       coordinates
///   {"sum": [f, ...]}
///   {"separable": {"coef": c, "factors": [p_t, p_x1, ...]}}
///   {"ridge": {"coef": c, "direction": [k_t, k_x...], "offset": o, "profile": p}}
///   {"radial": {"coef": c, "center": [x...], "profile": p}}
///   {"expquad": {"coef": c, "q": [row-major (n+1)^2], "b": [n+1], "c": c0}}
/// with profiles ["one"], ["poly", c0, c1, ...], ["sin", a, b], ["cos", a, b],
/// ["exp", a, b], ["gauss", a, c], ["bump", c, r, p], ["power", p].
fields::AnalyticFn parse_function(const json& j, int n, const std::string& where);
fields::Profile parse_profile(const json& j, const std::string& where);

/// {"bounds": [[lo, hi], ...], "dx", "dt", "t_max", "cfl"?}
fields::Grid parse_grid(Reader r);
/// {"a1", "a2": [...], "a3", "b1", "b2", "f", "laplacian_scale", "b1_bound", "b1_lower"}
spde::Coefficients parse_coefficients(Reader r, int n);
/// {"balls": [{"center", "radius"}], "boxes": [{"lo", "hi"}]}
propagation::SupportSet parse_support(Reader r, int n);

// Runs

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  unsigned threads = 0;
};

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Outcome {
  ResultTable table;
  std::vector<Assertion> assertions;
  std::vector<std::string> log;  // informational lines for the run log
  bool passed() const;
};

/// Subcommand name, one-line summary and the module operations it exercises.
struct Route {
  std::string name;
  std::string summary;
  std::vector<std::string> operations;
};
const std::vector<Route>& routes();

/// Runs a subcommand on a parsed config without touching the file system.
/// Throws ConfigError (or InputError) for usage problems.
Outcome execute(const std::string& subcommand, const json& config, const Overrides& o = {});

struct RunOptions {
  std::string subcommand;
  std::string config_path;
  std::string out_dir = "out";
  Overrides overrides;
  bool gnuplot = false;
};

/// Full CLI run: reads the config, executes, then writes <out>/<subcommand>.csv,
/// <out>/<subcommand>.log and, with gnuplot, <out>/<subcommand>.gp.
/// Returns 0 when all assertions pass, 1 when one fails, 2 on usage or config
/// errors (nothing is written in that case).
int run(const RunOptions& opt, std::string* message = nullptr);

}  // namespace carleman::lab
