#include "mdtlab/env/task.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mdtlab/error.hpp"

namespace mdtlab::env {

using nlohmann::json;

std::string_view to_string(Action a) { return a == Action::kLeft ? "L" : "R"; }

Action parse_action(std::string_view s) {
  if (s == "L" || s == "left" || s == "Left") return Action::kLeft;
  if (s == "R" || s == "right" || s == "Right") return Action::kRight;
  throw ConfigError("unknown action '" + std::string(s) + "'");
}

std::string_view to_string(TokenColor c) {
  switch (c) {
    case TokenColor::kNone: return "none";
    case TokenColor::kRed: return "red";
    case TokenColor::kBlue: return "blue";
    case TokenColor::kYellow: return "yellow";
  }
  return "none";
}

TokenColor parse_color(std::string_view s) {
  if (s == "none") return TokenColor::kNone;
  if (s == "red") return TokenColor::kRed;
  if (s == "blue") return TokenColor::kBlue;
  if (s == "yellow") return TokenColor::kYellow;
  throw ConfigError("unknown token color '" + std::string(s) + "'");
}

std::string_view to_string(Goal g) {
  switch (g) {
    case Goal::kFlexible: return "flexible";
    case Goal::kRed: return "red";
    case Goal::kBlue: return "blue";
    case Goal::kYellow: return "yellow";
  }
  return "flexible";
}

Goal parse_goal(std::string_view s) {
  if (s == "flexible") return Goal::kFlexible;
  if (s == "red") return Goal::kRed;
  if (s == "blue") return Goal::kBlue;
  if (s == "yellow") return Goal::kYellow;
  throw ConfigError("unknown goal '" + std::string(s) + "'");
}

bool is_token_value(double v) { return token_index(v) >= 0; }

int token_index(double v) {
  for (std::size_t i = 0; i < kTokenValues.size(); ++i)
    if (v == kTokenValues[i]) return static_cast<int>(i);
  return -1;
}

std::string_view to_string(Uncertainty u) { return u == Uncertainty::kLow ? "low" : "high"; }

Uncertainty parse_uncertainty(std::string_view s) {
  if (s == "low") return Uncertainty::kLow;
  if (s == "high") return Uncertainty::kHigh;
  throw ConfigError("unknown uncertainty label '" + std::string(s) + "'");
}

Uncertainty classify_uncertainty(double p) {
  return std::abs(p - 0.5) < 0.2 ? Uncertainty::kHigh : Uncertainty::kLow;
}

// ---------------------------------------------------------------- TaskGraph

TaskGraph::TaskGraph(std::string name, std::vector<StateNode> nodes)
    : name_(std::move(name)), nodes_(std::move(nodes)) {
  validate();
}

void TaskGraph::validate() {
  if (nodes_.size() < 3) throw ConfigError("task graph '" + name_ + "' needs at least 3 states");
  int roots = 0;
  terminals_.clear();
  for (int s = 0; s < n_states(); ++s) {
    const auto& n = nodes_[s];
    if (n.stage < 1 || n.stage > 3)
      throw ConfigError("state " + n.name + ": stage must be 1, 2 or 3");
    if (n.stage == 1) {
      ++roots;
      root_ = s;
    }
    if (n.stage == 3) {
      if (!is_token_value(n.token_value))
        throw ConfigError("state " + n.name + ": token value " + std::to_string(n.token_value) +
                          " is not in {0,10,20,40}");
      terminals_.push_back(s);
      continue;
    }
    for (int a = 0; a < kNumActions; ++a) {
      const auto& succ = n.successors[a];
      const std::string where =
          "state " + n.name + " action " + std::string(to_string(action_from_index(a)));
      for (int t : succ) {
        if (t < 0 || t >= n_states()) throw ConfigError(where + ": missing successor");
        if (nodes_[t].stage != n.stage + 1)
          throw ConfigError(where + ": successor " + nodes_[t].name + " is not at stage " +
                            std::to_string(n.stage + 1));
      }
      if (succ[0] == succ[1]) throw ConfigError(where + ": candidate successors must differ");
    }
  }
  if (roots != 1)
    throw ConfigError("task graph '" + name_ + "' must have exactly one stage-1 state");
  if (terminals_.empty()) throw ConfigError("task graph '" + name_ + "' has no terminal state");
}

int TaskGraph::terminal_index(int s) const {
  auto it = std::find(terminals_.begin(), terminals_.end(), s);
  return it == terminals_.end() ? -1 : static_cast<int>(it - terminals_.begin());
}

int TaskGraph::state_id(std::string_view name) const {
  for (int s = 0; s < n_states(); ++s)
    if (nodes_[s].name == name) return s;
  return -1;
}

int TaskGraph::stage_count(int stage) const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                        [stage](const StateNode& n) { return n.stage == stage; }));
}

double TaskGraph::max_token() const {
  double m = 0.0;
  for (int t : terminals_) m = std::max(m, static_cast<double>(nodes_[t].token_value));
  return m;
}

json TaskGraph::to_json() const {
  json states = json::array();
  for (const auto& n : nodes_) {
    json s = {{"name", n.name}, {"stage", n.stage}};
    if (n.stage == 3) {
      s["token"] = n.token_value;
      s["color"] = to_string(n.color);
    } else {
      s["left"] = {nodes_[n.successors[0][0]].name, nodes_[n.successors[0][1]].name};
      s["right"] = {nodes_[n.successors[1][0]].name, nodes_[n.successors[1][1]].name};
    }
    states.push_back(std::move(s));
  }
  return {{"name", name_}, {"states", std::move(states)}};
}

TaskGraph TaskGraph::from_json(const json& j) {
  if (!j.contains("states") || !j["states"].is_array())
    throw ConfigError("task graph: 'states' array required");
  const auto& arr = j["states"];
  std::vector<StateNode> nodes(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    nodes[i].name = arr[i].at("name").get<std::string>();
    nodes[i].stage = arr[i].at("stage").get<int>();
  }
  auto lookup = [&](const std::string& name) {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].name == name) return static_cast<int>(i);
    return -1;
  };
  for (std::size_t i = 0; i < arr.size(); ++i) {
    auto& n = nodes[i];
    if (n.stage == 3) {
      n.token_value = arr[i].value("token", 0);
      n.color = parse_color(arr[i].value("color", "none"));
      continue;
    }
    for (int a = 0; a < kNumActions; ++a) {
      const char* key = a == 0 ? "left" : "right";
      const std::string where = "state " + n.name + " action " + key;
      if (!arr[i].contains(key)) throw ConfigError(where + ": missing successor list");
      const auto& succ = arr[i][key];
      if (!succ.is_array() || succ.size() != 2)
        throw ConfigError(where + ": expected 2 candidate successors, got " +
                          std::to_string(succ.is_array() ? succ.size() : 0));
      for (int slot = 0; slot < 2; ++slot) {
        const auto id = lookup(succ[slot].get<std::string>());
        if (id < 0)
          throw ConfigError(where + ": missing successor '" + succ[slot].get<std::string>() + "'");
        n.successors[a][slot] = id;
      }
    }
  }
  return TaskGraph(j.value("name", "graph"), std::move(nodes));
}

double goal_reward(const TaskGraph& g, int terminal, Goal goal) {
  const auto& n = g.node(terminal);
  if (n.stage != 3) return 0.0;
  if (n.token_value <= 0) return 0.0;
  if (!is_specific(goal)) return n.token_value;
  return index(goal) == static_cast<int>(n.color) ? n.token_value : 0.0;
}

namespace {

StateNode decision(std::string name, int stage, std::array<int, 2> left, std::array<int, 2> right) {
  StateNode n;
  n.name = std::move(name);
  n.stage = stage;
  n.successors = {left, right};
  return n;
}

StateNode terminal(std::string name, int token, TokenColor color) {
  StateNode n;
  n.name = std::move(name);
  n.stage = 3;
  n.token_value = token;
  n.color = color;
  return n;
}

}  // namespace

// Root S1 -> {S2,S3} (left) / {S4,S5} (right); terminals S6..S9 carry the
// 40 (red), 20 (yellow), 10 (blue) and 0 (no token) outcomes.
TaskGraph tree_graph() {
  std::vector<StateNode> n;
  n.push_back(decision("S1", 1, {1, 2}, {3, 4}));
  n.push_back(decision("S2", 2, {5, 6}, {6, 7}));
  n.push_back(decision("S3", 2, {6, 8}, {7, 5}));
  n.push_back(decision("S4", 2, {7, 8}, {8, 5}));
  n.push_back(decision("S5", 2, {5, 7}, {8, 6}));
  n.push_back(terminal("S6", 40, TokenColor::kRed));
  n.push_back(terminal("S7", 20, TokenColor::kYellow));
  n.push_back(terminal("S8", 10, TokenColor::kBlue));
  n.push_back(terminal("S9", 0, TokenColor::kNone));
  return TaskGraph("tree", std::move(n));
}

// Overlapping paths: both root actions share S3 as their second candidate,
// and neighbouring stage-2 rungs share terminals.
TaskGraph ladder_graph() {
  std::vector<StateNode> n;
  n.push_back(decision("S1", 1, {1, 2}, {3, 2}));
  n.push_back(decision("S2", 2, {4, 5}, {5, 6}));
  n.push_back(decision("S3", 2, {5, 6}, {6, 7}));
  n.push_back(decision("S4", 2, {6, 7}, {7, 4}));
  n.push_back(terminal("S5", 40, TokenColor::kRed));
  n.push_back(terminal("S6", 20, TokenColor::kYellow));
  n.push_back(terminal("S7", 10, TokenColor::kBlue));
  n.push_back(terminal("S8", 0, TokenColor::kNone));
  return TaskGraph("ladder", std::move(n));
}

// ----------------------------------------------------------------- Dynamics

std::string_view to_string(DynamicsKind k) {
  switch (k) {
    case DynamicsKind::kFixed: return "fixed";
    case DynamicsKind::kDrift: return "drift";
    case DynamicsKind::kSwitch: return "switch";
    case DynamicsKind::kDriftSwitch: return "drift_switch";
  }
  return "fixed";
}

DynamicsKind parse_dynamics(std::string_view s) {
  if (s == "fixed") return DynamicsKind::kFixed;
  if (s == "drift") return DynamicsKind::kDrift;
  if (s == "switch") return DynamicsKind::kSwitch;
  if (s == "drift_switch") return DynamicsKind::kDriftSwitch;
  throw ConfigError("unknown dynamics kind '" + std::string(s) + "'");
}

double reflect(double x, double lo, double hi) {
  if (hi <= lo) return lo;
  const double width = hi - lo;
  double y = std::fmod(x - lo, 2.0 * width);
  if (y < 0) y += 2.0 * width;
  return y <= width ? lo + y : hi - (y - width);
}

void UncertaintyDynamics::validate() const {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must be in [0,1]");
  };
  prob(fixed_p, "fixed_p");
  prob(drift_lo, "drift_lo");
  prob(drift_hi, "drift_hi");
  prob(switch_low_p, "switch_low_p");
  prob(switch_high_p, "switch_high_p");
  if (drift_lo > drift_hi) throw ConfigError("drift bounds must satisfy lo <= hi");
  if (drift_sigma < 0) throw ConfigError("drift_sigma must be >= 0");
  if (switch_block < 1) throw ConfigError("switch_block must be >= 1");
  auto inside = [&](double p, const char* what) {
    if (p < drift_lo || p > drift_hi)
      throw ConfigError(std::string(what) + " must lie inside the drift bounds");
  };
  if (kind == DynamicsKind::kDrift) inside(fixed_p, "drift start (fixed_p)");
  if (kind == DynamicsKind::kDriftSwitch) {
    inside(switch_low_p, "switch_low_p");
    inside(switch_high_p, "switch_high_p");
  }
}

json UncertaintyDynamics::to_json() const {
  return {{"kind", to_string(kind)},
          {"fixed_p", fixed_p},
          {"drift_sigma", drift_sigma},
          {"drift_bounds", {drift_lo, drift_hi}},
          {"switch_low", {switch_low_p, 1.0 - switch_low_p}},
          {"switch_high", {switch_high_p, 1.0 - switch_high_p}},
          {"switch_block", switch_block}};
}

UncertaintyDynamics UncertaintyDynamics::from_json(const json& j) {
  UncertaintyDynamics d;
  d.kind = parse_dynamics(j.at("kind").get<std::string>());
  d.fixed_p = j.value("fixed_p", d.fixed_p);
  d.drift_sigma = j.value("drift_sigma", d.drift_sigma);
  if (j.contains("drift_bounds")) {
    d.drift_lo = j["drift_bounds"].at(0).get<double>();
    d.drift_hi = j["drift_bounds"].at(1).get<double>();
  }
  if (j.contains("switch_low")) d.switch_low_p = j["switch_low"].at(0).get<double>();
  if (j.contains("switch_high")) d.switch_high_p = j["switch_high"].at(0).get<double>();
  d.switch_block = j.value("switch_block", d.switch_block);
  d.validate();
  return d;
}

// ----------------------------------------------------------------- TaskSpec

std::string_view to_string(Structure s) { return s == Structure::kLadder ? "ladder" : "tree"; }

Structure parse_structure(std::string_view s) {
  if (s == "ladder") return Structure::kLadder;
  if (s == "tree") return Structure::kTree;
  throw ConfigError("unknown structure '" + std::string(s) + "'");
}

void TaskSpec::validate() const {
  if (n_trials < 1) throw ConfigError("task " + id + ": n_trials must be >= 1");
  dynamics.validate();
  if (goal_schedule.empty() && goal_alphabet.empty())
    throw ConfigError("task " + id + ": goal alphabet is empty");
  if (!goal_schedule.empty() && static_cast<int>(goal_schedule.size()) < n_trials)
    throw ConfigError("task " + id + ": goal schedule shorter than n_trials");
  if (graph.n_states() == 0) throw ConfigError("task " + id + ": missing graph");
}

json TaskSpec::to_json() const {
  json j = {{"schema", kTaskSchema},
            {"id", id},
            {"description", description},
            {"structure", to_string(structure)},
            {"graph", graph.to_json()},
            {"dynamics", dynamics.to_json()},
            {"n_trials", n_trials},
            {"env_seed", env_seed}};
  json alphabet = json::array();
  for (Goal g : goal_alphabet) alphabet.push_back(to_string(g));
  j["goal_alphabet"] = std::move(alphabet);
  if (!goal_schedule.empty()) {
    json sched = json::array();
    for (Goal g : goal_schedule) sched.push_back(to_string(g));
    j["goal_schedule"] = std::move(sched);
  }
  return j;
}

TaskSpec TaskSpec::from_json(const json& j) {
  if (j.value("schema", "") != kTaskSchema)
    throw ConfigError("task spec: expected schema '" + std::string(kTaskSchema) + "'");
  TaskSpec t;
  t.id = j.at("id").get<std::string>();
  t.description = j.value("description", "");
  t.structure = parse_structure(j.at("structure").get<std::string>());
  t.graph = TaskGraph::from_json(j.at("graph"));
  t.dynamics = UncertaintyDynamics::from_json(j.at("dynamics"));
  t.n_trials = j.at("n_trials").get<int>();
  t.env_seed = j.at("env_seed").get<std::uint64_t>();
  for (const auto& g : j.value("goal_alphabet", json::array()))
    t.goal_alphabet.push_back(parse_goal(g.get<std::string>()));
  for (const auto& g : j.value("goal_schedule", json::array()))
    t.goal_schedule.push_back(parse_goal(g.get<std::string>()));
  t.validate();
  return t;
}

TaskSpec TaskSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open task spec '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("task spec '" + path + "': " + e.what());
  }
  return from_json(j);
}

void TaskSpec::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write task spec '" + path + "'");
  out << to_json().dump(2) << '\n';
}

// ------------------------------------------------------------ Ideal agent

bool IdealChoice::tie() const { return std::abs(values[0] - values[1]) <= 1e-9; }

namespace {

double stage2_value(const TaskGraph& g, double p, Goal goal, int state, Action a) {
  const auto& succ = g.successors(state, a);
  return p * goal_reward(g, succ[0], goal) + (1.0 - p) * goal_reward(g, succ[1], goal);
}

}  // namespace

IdealChoice ideal_choice(const TaskGraph& g, double p, Goal goal, int state) {
  IdealChoice c;
  const int stage = g.stage_of(state);
  if (stage == 3) throw ProtocolError("ideal action requested at terminal state " + g.node(state).name);
  for (int a = 0; a < kNumActions; ++a) {
    const Action act = action_from_index(a);
    if (stage == 2) {
      c.values[a] = stage2_value(g, p, goal, state, act);
    } else {
      const auto& succ = g.successors(state, act);
      double v = 0.0;
      for (int slot = 0; slot < 2; ++slot) {
        const int s2 = succ[slot];
        const double best = std::max(stage2_value(g, p, goal, s2, Action::kLeft),
                                     stage2_value(g, p, goal, s2, Action::kRight));
        v += (slot == 0 ? p : 1.0 - p) * best;
      }
      c.values[a] = v;
    }
  }
  c.action = c.values[1] > c.values[0] ? Action::kRight : Action::kLeft;
  return c;
}

double ideal_root_value(const TaskGraph& g, double p, Goal goal) {
  const auto c = ideal_choice(g, p, goal, g.root());
  return std::max(c.values[0], c.values[1]);
}

}  // namespace mdtlab::env
