#pragma once

#include <optional>
#include <vector>

#include "mdtlab/data/dataset.hpp"

namespace mdtlab::analysis {

enum class OptimalityStage { kStage1, kStage2 };

struct Optimality {
  std::vector<int> per_trial;  // 1 when the agent matched the ideal action
  std::vector<bool> tie;       // ideal action was a tie on that trial
  double mean = 0.0;
};

// Agreement with the ideal agent that knows the trial's true p and goal.
Optimality choice_optimality(const data::SubjectDataset& ds, const env::TaskGraph& graph,
                             OptimalityStage stage = OptimalityStage::kStage1);

// Fraction of state revisits (stage-1 and stage-2 decision states) where the
// action repeats the one taken at the previous visit. Undefined without
// revisits.
std::optional<double> choice_consistency(const data::SubjectDataset& ds);

enum class RewardFilter { kAll, kActionChanged };

// Mean of reward / ideal expected reward over trials with a positive
// denominator. Undefined when no trial qualifies.
std::optional<double> normalized_reward(const data::SubjectDataset& ds, const env::TaskGraph& graph,
                                        RewardFilter filter = RewardFilter::kAll);

// Per-trial reward / ideal expected reward; NaN where the denominator is 0.
std::vector<double> normalized_reward_per_trial(const data::SubjectDataset& ds, const env::TaskGraph& graph);

}  // namespace mdtlab::analysis
