#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace mdtlab::env {

enum class Action : std::uint8_t { kLeft = 0, kRight = 1 };
inline constexpr int kNumActions = 2;

inline int index(Action a) { return static_cast<int>(a); }
inline Action action_from_index(int i) { return i == 0 ? Action::kLeft : Action::kRight; }
std::string_view to_string(Action a);
Action parse_action(std::string_view s);

enum class TokenColor : std::uint8_t { kNone = 0, kRed = 1, kBlue = 2, kYellow = 3 };
std::string_view to_string(TokenColor c);
TokenColor parse_color(std::string_view s);

// Per-trial goal condition. Flexible pays any nonzero token; the three
// specific goals pay only the token of that color.
enum class Goal : std::uint8_t { kFlexible = 0, kRed = 1, kBlue = 2, kYellow = 3 };
inline constexpr int kNumGoals = 4;
inline int index(Goal g) { return static_cast<int>(g); }
inline bool is_specific(Goal g) { return g != Goal::kFlexible; }
std::string_view to_string(Goal g);
Goal parse_goal(std::string_view s);

// The closed reward set of the task family.
inline constexpr std::array<int, 4> kTokenValues = {0, 10, 20, 40};
bool is_token_value(double v);
// Position of a token value in kTokenValues, or -1.
int token_index(double v);

enum class Uncertainty : std::uint8_t { kLow = 0, kHigh = 1 };
std::string_view to_string(Uncertainty u);
Uncertainty parse_uncertainty(std::string_view s);
// High uncertainty when the first-successor probability is within 0.2 of 0.5.
Uncertainty classify_uncertainty(double p);

struct StateNode {
  std::string name;
  int stage = 1;
  // successors[action][slot]; slot 0 receives probability p.
  std::array<std::array<int, 2>, 2> successors{};
  int token_value = 0;
  TokenColor color = TokenColor::kNone;
};

// State graph of a two-stage task. State ids are dense 0-based indices; names
// ("S1".."S9") are kept for files and diagnostics.
class TaskGraph {
 public:
  TaskGraph() = default;
  TaskGraph(std::string name, std::vector<StateNode> nodes);

  const std::string& name() const { return name_; }
  int n_states() const { return static_cast<int>(nodes_.size()); }
  const StateNode& node(int s) const { return nodes_.at(s); }
  int stage_of(int s) const { return nodes_.at(s).stage; }
  int root() const { return root_; }
  const std::array<int, 2>& successors(int s, Action a) const {
    return nodes_.at(s).successors[index(a)];
  }
  const std::vector<int>& terminals() const { return terminals_; }
  int terminal_index(int s) const;  // position in terminals(), -1 if not terminal
  int state_id(std::string_view name) const;  // -1 if unknown
  int stage_count(int stage) const;
  double max_token() const;

  nlohmann::json to_json() const;
  static TaskGraph from_json(const nlohmann::json& j);

  bool operator==(const TaskGraph& o) const { return to_json() == o.to_json(); }

 private:
  void validate();

  std::string name_;
  std::vector<StateNode> nodes_;
  std::vector<int> terminals_;
  int root_ = 0;
};

// Reward paid on reaching `terminal` under `goal`.
double goal_reward(const TaskGraph& g, int terminal, Goal goal);

TaskGraph tree_graph();
TaskGraph ladder_graph();

enum class DynamicsKind : std::uint8_t { kFixed, kDrift, kSwitch, kDriftSwitch };
std::string_view to_string(DynamicsKind k);
DynamicsKind parse_dynamics(std::string_view s);

// Trial-by-trial evolution of the first-successor probability p, shared by
// every (state, action) row.
struct UncertaintyDynamics {
  DynamicsKind kind = DynamicsKind::kFixed;
  double fixed_p = 0.9;       // Fixed: constant p; Drift: starting p
  double drift_sigma = 0.025; // per-trial step sd of the random walk
  double drift_lo = 0.2;
  double drift_hi = 0.8;
  double switch_low_p = 0.9;  // low-uncertainty regime (0.9, 0.1)
  double switch_high_p = 0.5; // high-uncertainty regime (0.5, 0.5)
  int switch_block = 20;      // trials per regime

  void validate() const;
  nlohmann::json to_json() const;
  static UncertaintyDynamics from_json(const nlohmann::json& j);
  bool operator==(const UncertaintyDynamics&) const = default;
};

// Reflect x into [lo, hi].
double reflect(double x, double lo, double hi);

enum class Structure : std::uint8_t { kLadder, kTree };
std::string_view to_string(Structure s);
Structure parse_structure(std::string_view s);

inline constexpr std::string_view kTaskSchema = "mdtlab.task/1";

struct TaskSpec {
  std::string id;
  std::string description;
  Structure structure = Structure::kTree;
  TaskGraph graph;
  UncertaintyDynamics dynamics;
  // Goals drawn i.i.d. uniformly from this alphabet, unless an explicit
  // schedule is given.
  std::vector<Goal> goal_alphabet;
  std::vector<Goal> goal_schedule;
  int n_trials = 400;
  std::uint64_t env_seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static TaskSpec from_json(const nlohmann::json& j);
  static TaskSpec load(const std::string& path);
  void save(const std::string& path) const;
};

// Optimal stage-wise choice given the true transition probability p and goal.
// Ties go to Left.
struct IdealChoice {
  Action action = Action::kLeft;
  std::array<double, 2> values{};
  bool tie() const;
};

IdealChoice ideal_choice(const TaskGraph& g, double p, Goal goal, int state);
double ideal_root_value(const TaskGraph& g, double p, Goal goal);

}  // namespace mdtlab::env
