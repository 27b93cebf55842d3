#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mdtlab::experiment {

// Undefined values are written as this marker.
inline constexpr std::string_view kNA = "NA";

// Shortest round-trip decimal form; NaN and infinities become NA.
std::string fmt(double v);
std::string fmt(const std::optional<double>& v);
std::optional<double> parse_number(std::string_view s);

// Plain comma-separated table. Fields never contain commas, quotes or
// newlines; callers join list-valued fields with ';'.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  explicit Table(std::vector<std::string> columns = {}) : header(std::move(columns)) {}
  void add(std::vector<std::string> row);
  int column(std::string_view name) const;  // throws SchemaError when absent
  const std::string& at(std::size_t row, std::string_view col) const;

  std::string to_csv() const;
  static Table parse(const std::string& text);
  void write(const std::string& path) const;
  static Table read(const std::string& path);
};

}  // namespace mdtlab::experiment
