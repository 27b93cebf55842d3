#pragma once

#include <array>

#include "mdtlab/env/task.hpp"

namespace mdtlab::rl {

using env::Action;
using env::Goal;

// What an agent sees at a decision point: the task state and the current goal.
struct Observation {
  int state = 0;
  Goal goal = Goal::kFlexible;

  // Dense index over the state x goal cross product.
  int index() const { return state * env::kNumGoals + env::index(goal); }
  static Observation from_index(int i) {
    return {i / env::kNumGoals, static_cast<Goal>(i % env::kNumGoals)};
  }
  bool operator==(const Observation&) const = default;
};

inline int n_observations(int n_states) { return n_states * env::kNumGoals; }

// Probability of Left and Right.
using ActionDist = std::array<double, 2>;
using ActionValues = std::array<double, 2>;

}  // namespace mdtlab::rl
