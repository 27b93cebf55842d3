#include "mdtlab/env/suite.hpp"

#include "mdtlab/rng.hpp"

namespace mdtlab::env {

namespace {

const std::vector<Goal> kAllGoals = {Goal::kFlexible, Goal::kRed, Goal::kBlue, Goal::kYellow};

TaskSpec make(std::string id, std::string description, Structure structure,
              UncertaintyDynamics dynamics, std::vector<Goal> alphabet, int index) {
  TaskSpec t;
  t.id = std::move(id);
  t.description = std::move(description);
  t.structure = structure;
  t.graph = structure == Structure::kTree ? tree_graph() : ladder_graph();
  t.dynamics = dynamics;
  t.goal_alphabet = std::move(alphabet);
  t.n_trials = 400;
  t.env_seed = derive_seed(0x6d64746c6162ULL, {static_cast<std::uint64_t>(index)});
  return t;
}

UncertaintyDynamics fixed(double p) {
  UncertaintyDynamics d;
  d.kind = DynamicsKind::kFixed;
  d.fixed_p = p;
  return d;
}

UncertaintyDynamics drift() {
  UncertaintyDynamics d;
  d.kind = DynamicsKind::kDrift;
  d.fixed_p = 0.7;
  return d;
}

UncertaintyDynamics switching(int block) {
  UncertaintyDynamics d;
  d.kind = DynamicsKind::kSwitch;
  d.switch_block = block;
  return d;
}

// Drift within each regime; p restarts at the regime anchor on every switch.
UncertaintyDynamics drift_switch(int block) {
  UncertaintyDynamics d;
  d.kind = DynamicsKind::kDriftSwitch;
  d.switch_block = block;
  d.drift_lo = 0.4;
  d.drift_hi = 0.95;
  return d;
}

constexpr int kVolatileBlock = 10;

}  // namespace

std::vector<TaskSpec> canonical_suite() {
  std::vector<TaskSpec> s;
  s.push_back(make("T01", "two-step anchor: tree, fixed (0.7, 0.3), flexible goals only",
                   Structure::kTree, fixed(0.7), {Goal::kFlexible}, 1));
  s.push_back(make("T02", "ladder, fixed (0.9, 0.1)", Structure::kLadder, fixed(0.9), kAllGoals, 2));
  s.push_back(make("T03", "ladder, drift", Structure::kLadder, drift(), kAllGoals, 3));
  s.push_back(make("T04", "ladder, switch", Structure::kLadder, switching(kVolatileBlock), kAllGoals, 4));
  s.push_back(make("T05", "ladder, drift + switch", Structure::kLadder, drift_switch(kVolatileBlock),
                   kAllGoals, 5));
  s.push_back(make("T06", "tree, fixed (0.9, 0.1)", Structure::kTree, fixed(0.9), kAllGoals, 6));
  s.push_back(make("T07", "tree, drift", Structure::kTree, drift(), kAllGoals, 7));
  s.push_back(make("T08", "tree, switch", Structure::kTree, switching(kVolatileBlock), kAllGoals, 8));
  s.push_back(make("T09", "tree, drift + switch", Structure::kTree, drift_switch(kVolatileBlock),
                   kAllGoals, 9));
  s.push_back(original_task());
  return s;
}

TaskSpec original_task(int n_trials) {
  return original_task(n_trials, derive_seed(0x6d64746c6162ULL, {10}));
}

TaskSpec original_task(int n_trials, std::uint64_t env_seed) {
  TaskSpec t = make("T10", "original two-stage task: tree, switch (0.9, 0.1) / (0.5, 0.5) every 20 trials",
                    Structure::kTree, switching(20), kAllGoals, 10);
  t.n_trials = n_trials;
  t.env_seed = env_seed;
  return t;
}

}  // namespace mdtlab::env
