#include "mdtlab/data/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mdtlab/error.hpp"
#include "mdtlab/rng.hpp"

namespace mdtlab::data {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int parse_int(std::string_view s, int row, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw SchemaError(std::string("bad ") + what + " '" + std::string(s) + "'", row);
  return v;
}

double parse_double(std::string_view s, int row, const char* what) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument(str);
    return v;
  } catch (const std::exception&) {
    throw SchemaError(std::string("bad ") + what + " '" + std::string(s) + "'", row);
  }
}

template <typename F>
auto parse_field(F&& f, std::string_view s, int row) {
  try {
    return f(s);
  } catch (const SchemaError& e) {
    if (e.row() != 0) throw;
    throw SchemaError(e.what(), row);
  } catch (const Error& e) {
    throw SchemaError(e.what(), row);
  }
}

}  // namespace

std::string state_name(int id) { return "S" + std::to_string(id + 1); }

int parse_state_name(std::string_view s) {
  if (s.size() < 2 || s[0] != 'S') throw SchemaError("bad state name '" + std::string(s) + "'");
  int v = 0;
  auto [p, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v < 1)
    throw SchemaError("bad state name '" + std::string(s) + "'");
  return v - 1;
}

std::string to_csv(const SubjectDataset& ds) {
  std::ostringstream out;
  out << kDatasetHeader << '\n';
  out << "# subject: " << ds.subject_id << '\n';
  out << "# task: " << ds.task_id << '\n';
  out << "# provenance: " << nlohmann::json{{"kind", ds.provenance.kind}, {"detail", ds.provenance.detail}}.dump()
      << '\n';
  out << kDatasetColumns << '\n';
  for (const auto& r : ds.records) {
    out << ds.subject_id << ',' << r.trial << ',' << env::to_string(r.goal) << ','
        << env::to_string(r.uncertainty) << ',' << format_double(r.p_transition) << ','
        << state_name(r.s1) << ',' << env::to_string(r.a1) << ',' << state_name(r.s2) << ','
        << env::to_string(r.a2) << ',' << state_name(r.s3) << ',' << format_double(r.reward) << ',';
    if (r.block >= 0) out << r.block;
    out << '\n';
  }
  return out.str();
}

SubjectDataset from_csv(const std::string& text) {
  if (text.empty()) throw SchemaError("no records: empty file");
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line() || line != kDatasetHeader)
    throw SchemaError("bad header: expected '" + std::string(kDatasetHeader) + "'");

  SubjectDataset ds;
  bool have_columns = false;
  bool subject_from_header = false;
  int row = 0;
  while (next_line()) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string_view body = std::string_view(line).substr(1);
      const auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;
      auto key = body.substr(0, colon);
      auto value = body.substr(colon + 1);
      while (!key.empty() && key.front() == ' ') key.remove_prefix(1);
      while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
      if (key == "subject") {
        ds.subject_id = std::string(value);
        subject_from_header = true;
      } else if (key == "task") {
        ds.task_id = std::string(value);
      } else if (key == "provenance") {
        try {
          const auto j = nlohmann::json::parse(value);
          ds.provenance.kind = j.value("kind", "external");
          ds.provenance.detail = j.value("detail", nlohmann::json::object());
        } catch (const nlohmann::json::exception&) {
          throw SchemaError("bad header: provenance line is not valid JSON");
        }
      }
      continue;
    }
    if (!have_columns) {
      if (line != kDatasetColumns)
        throw SchemaError("bad header: expected columns '" + std::string(kDatasetColumns) + "'");
      have_columns = true;
      continue;
    }
    ++row;
    const auto f = split(line, ',');
    if (f.size() != 12)
      throw SchemaError("expected 12 fields, got " + std::to_string(f.size()), row);
    BehaviorRecord r;
    const std::string subject(f[0]);
    if (!subject_from_header && row == 1) ds.subject_id = subject;
    if (subject != ds.subject_id)
      throw SchemaError("subject_id '" + subject + "' differs from '" + ds.subject_id + "'", row);
    r.trial = parse_int(f[1], row, "trial");
    if (r.trial != row - 1)
      throw SchemaError("non-dense trial index " + std::to_string(r.trial) + ", expected " +
                            std::to_string(row - 1),
                        row);
    r.goal = parse_field([](auto s) { return env::parse_goal(s); }, f[2], row);
    r.uncertainty = parse_field([](auto s) { return env::parse_uncertainty(s); }, f[3], row);
    r.p_transition = parse_double(f[4], row, "p_transition");
    if (!(r.p_transition >= 0.0 && r.p_transition <= 1.0))
      throw SchemaError("p_transition " + std::string(f[4]) + " outside [0, 1]", row);
    r.s1 = parse_field([](auto s) { return parse_state_name(s); }, f[5], row);
    r.a1 = parse_field([](auto s) { return env::parse_action(s); }, f[6], row);
    r.s2 = parse_field([](auto s) { return parse_state_name(s); }, f[7], row);
    r.a2 = parse_field([](auto s) { return env::parse_action(s); }, f[8], row);
    r.s3 = parse_field([](auto s) { return parse_state_name(s); }, f[9], row);
    r.reward = parse_double(f[10], row, "reward");
    if (!env::is_token_value(r.reward))
      throw SchemaError("reward " + std::string(f[10]) + " is not one of 0, 10, 20, 40", row);
    r.block = f[11].empty() ? -1 : parse_int(f[11], row, "block");
    ds.records.push_back(r);
  }
  if (!have_columns) throw SchemaError("bad header: missing column line");
  if (ds.records.empty()) throw SchemaError("no records");
  return ds;
}

SubjectDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_csv(ss.str());
}

void save_dataset(const SubjectDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write dataset '" + path + "'");
  out << to_csv(ds);
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

std::uint64_t dataset_hash(const SubjectDataset& ds) { return fnv1a64(to_csv(ds)); }

std::string ValidationReport::summary(std::size_t max_items) const {
  if (ok()) return "ok";
  std::ostringstream out;
  out << violations.size() << " violation(s)";
  for (std::size_t i = 0; i < violations.size() && i < max_items; ++i)
    out << "; record " << violations[i].row << ": " << violations[i].message;
  return out.str();
}

ValidationReport validate_against_task(const SubjectDataset& ds, const env::TaskSpec& spec) {
  ValidationReport rep;
  const auto& g = spec.graph;
  auto add = [&](int row, std::string msg) { rep.violations.push_back({row, std::move(msg)}); };
  if (ds.records.empty()) add(0, "no records");
  auto known = [&](int s) { return s >= 0 && s < g.n_states(); };
  auto candidate = [&](int from, Action a, int to) {
    const auto& c = g.successors(from, a);
    return c[0] == to || c[1] == to;
  };
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    const int row = static_cast<int>(i);
    if (r.trial != row) add(row, "non-dense index: trial " + std::to_string(r.trial));
    bool goal_ok = false;
    for (Goal a : spec.goal_alphabet) goal_ok = goal_ok || a == r.goal;
    if (!goal_ok) add(row, "goal '" + std::string(env::to_string(r.goal)) + "' not in the task alphabet");
    if (!env::is_token_value(r.reward)) add(row, "reward outside the token set");
    if (r.uncertainty != env::classify_uncertainty(r.p_transition)) add(row, "uncertainty label does not match p_transition");
    if (!known(r.s1) || !known(r.s2) || !known(r.s3)) {
      add(row, "unknown state");
      continue;
    }
    if (r.s1 != g.root()) add(row, "stage mismatch: s1 " + state_name(r.s1) + " is not the root");
    if (g.stage_of(r.s2) != 2) {
      add(row, "stage mismatch: s2 " + state_name(r.s2) + " is stage " + std::to_string(g.stage_of(r.s2)));
      continue;
    }
    if (g.stage_of(r.s3) != 3) {
      add(row, "stage mismatch: s3 " + state_name(r.s3) + " is not terminal");
      continue;
    }
    if (r.s1 == g.root() && !candidate(r.s1, r.a1, r.s2))
      add(row, "illegal transition " + state_name(r.s1) + " -" + std::string(env::to_string(r.a1)) + "-> " +
                   state_name(r.s2));
    if (!candidate(r.s2, r.a2, r.s3))
      add(row, "illegal transition " + state_name(r.s2) + " -" + std::string(env::to_string(r.a2)) + "-> " +
                   state_name(r.s3));
    if (env::goal_reward(g, r.s3, r.goal) != r.reward) add(row, "reward does not match terminal and goal");
  }
  return rep;
}

void require_valid(const SubjectDataset& ds, const env::TaskSpec& spec) {
  const auto rep = validate_against_task(ds, spec);
  if (!rep.ok())
    throw SchemaError("dataset '" + ds.subject_id + "' violates task '" + spec.id + "': " + rep.summary());
}

}  // namespace mdtlab::data
