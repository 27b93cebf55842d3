#pragma once

#include <vector>

#include "mdtlab/data/dataset.hpp"
#include "mdtlab/deep/ddqn_agent.hpp"
#include "mdtlab/rl/agent.hpp"

namespace mdtlab::training {

struct LikelihoodResult {
  // Probability the agent assigned to each human decision: stage 1 then
  // stage 2 of every trial.
  std::vector<double> per_decision;
  double sum = 0.0;
  double mean = 0.0;
  double log_sum = 0.0;
};

// A frozen copy of `agent` starts a fresh session and walks the subject's
// recorded states, observing the subject's actions and rewards.
LikelihoodResult episode_likelihood(const rl::Agent& agent, const data::SubjectDataset& ds,
                                    const env::TaskGraph& graph);

// Maximum-likelihood inverse temperature for the softmax read-out of the
// DDQN's Q-values, fitted on the trailing `holdout_fraction` of the trials.
double fit_inverse_temperature(const deep::DdqnAgent& agent, const data::SubjectDataset& ds,
                               double holdout_fraction = 0.2, double beta_max = 1e4);

}  // namespace mdtlab::training
