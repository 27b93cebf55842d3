#pragma once

#include <array>
#include <vector>

#include "mdtlab/env/task.hpp"
#include "mdtlab/rng.hpp"

namespace mdtlab::env {

struct StepResult {
  int next_state = 0;
  int stage = 0;
  double reward = 0.0;  // nonzero only at the terminal step
  bool trial_done = false;
  TokenColor token_color = TokenColor::kNone;
};

// Two-stage Markov decision task. Goals and the transition-probability path
// for the whole session are materialized at construction from the spec's
// env_seed; transition draws come from a separate stream so the event
// sequence depends only on (spec, seed) and the actions taken.
class Environment {
 public:
  explicit Environment(TaskSpec spec);

  StepResult step(Action action);

  // Moves to the next trial. Returns false once the session is complete.
  [[nodiscard]] bool advance_trial();

  IdealChoice ideal_action(int state) const;
  double max_trial_value() const;

  int trial_index() const { return trial_; }
  int current_state() const { return state_; }
  int stage() const { return graph().stage_of(state_); }
  bool trial_done() const { return trial_done_; }
  Goal current_goal() const { return goals_[trial_]; }
  double transition_p() const { return p_path_[trial_]; }
  Uncertainty uncertainty() const { return classify_uncertainty(transition_p()); }
  std::array<double, 2> transition_row(int state, Action a) const;

  int n_trials() const { return spec_.n_trials; }
  double p_at(int trial) const { return p_path_.at(trial); }
  Goal goal_at(int trial) const { return goals_.at(trial); }
  const std::vector<double>& p_path() const { return p_path_; }
  const std::vector<Goal>& goals() const { return goals_; }

  const TaskSpec& spec() const { return spec_; }
  const TaskGraph& graph() const { return spec_.graph; }

 private:
  TaskSpec spec_;
  std::vector<double> p_path_;
  std::vector<Goal> goals_;
  Rng transition_rng_;
  int trial_ = 0;
  int state_ = 0;
  bool trial_done_ = false;
};

// Materialized first-successor probability for each trial.
std::vector<double> materialize_p_path(const UncertaintyDynamics& d, int n_trials, Rng& rng);

}  // namespace mdtlab::env
