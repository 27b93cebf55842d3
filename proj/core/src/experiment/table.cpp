#include "mdtlab/experiment/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mdtlab/error.hpp"

namespace mdtlab::experiment {

std::string fmt(double v) {
  if (!std::isfinite(v)) return std::string(kNA);
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(kNA); }

std::optional<double> parse_number(std::string_view s) {
  if (s.empty() || s == kNA) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw SchemaError("not a number: '" + std::string(s) + "'");
  return v;
}

void Table::add(std::vector<std::string> row) {
  if (row.size() != header.size())
    throw Error("table: row has " + std::to_string(row.size()) + " fields, header has " +
                std::to_string(header.size()));
  rows.push_back(std::move(row));
}

int Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw SchemaError("table: no column '" + std::string(name) + "'");
}

const std::string& Table::at(std::size_t row, std::string_view col) const { return rows.at(row).at(column(col)); }

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += row[i];
  }
  out += '\n';
}

}  // namespace

std::string Table::to_csv() const {
  std::string out;
  append_row(out, header);
  for (const auto& r : rows) append_row(out, r);
  return out;
}

Table Table::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Table t;
  bool have_header = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      t.header = split(line);
      have_header = true;
      continue;
    }
    auto fields = split(line);
    if (fields.size() != t.header.size()) throw SchemaError("table: wrong field count", row);
    t.rows.push_back(std::move(fields));
  }
  if (!have_header) throw SchemaError("table: empty input");
  return t;
}

void Table::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << to_csv();
  if (!out) throw Error("write failed for '" + path + "'");
}

Table Table::read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace mdtlab::experiment
