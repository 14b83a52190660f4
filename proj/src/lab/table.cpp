#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "carleman/errors.hpp"
#include "carleman/lab.hpp"

namespace carleman::lab {

void ResultTable::add(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw Error("result table: row has " + std::to_string(row.size()) + " cells, expected " +
                std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_double(*d);
  return quote(std::get<std::string>(c));
}

}  // namespace

std::string to_csv(const ResultTable& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  std::vector<std::string> head;
  for (const auto& c : t.columns) head.push_back(quote(c));
  head.insert(head.end(), {"config_hash", "artifact_version", "wall_time_s"});
  line(head);
  const std::string wall = format_double(t.wall_time_s);
  for (const auto& row : t.rows) {
    std::vector<std::string> cells;
    for (const auto& c : row) cells.push_back(cell_text(c));
    cells.insert(cells.end(), {quote(t.config_hash), quote(t.artifact_version), wall});
    line(cells);
  }
  return out;
}

void emit_csv(const ResultTable& t, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << to_csv(t);
  if (!f) throw IoError("failed writing '" + path + "'");
}

std::string config_hash(const json& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace carleman::lab
