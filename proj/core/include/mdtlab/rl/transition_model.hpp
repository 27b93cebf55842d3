#pragma once

#include <utility>
#include <vector>

#include "mdtlab/env/task.hpp"
#include "mdtlab/rl/observation.hpp"

namespace mdtlab::rl {

// Learned state-transition model updated from state prediction errors.
// Each (state, action) row is a distribution over the successors seen so far.
class TransitionModel {
 public:
  struct Entry {
    int next = 0;
    double prob = 0.0;
    bool operator==(const Entry&) const = default;
  };
  using Row = std::vector<Entry>;

  TransitionModel() = default;
  // Rows start uniform over the graph's candidate successors.
  TransitionModel(const env::TaskGraph& graph, double learning_rate);

  // Adds uniform rows for (state, action) pairs of `graph` the model has no
  // row for; existing rows are kept.
  void adapt(const env::TaskGraph& graph);

  // spe = 1 - T(s,a,s'); T(s,a,s') += eta * spe; other entries scale by
  // (1 - eta). An unseen successor joins the row with probability eta (or 1
  // when the row is empty). Returns spe.
  double update(int state, Action a, int next);

  double prob(int state, Action a, int next) const;
  const Row& row(int state, Action a) const;

  double learning_rate() const { return eta_; }
  void set_learning_rate(double eta) { eta_ = eta; }

  // Flat (state, action, next, prob) listing for checkpoints.
  std::vector<double> to_flat() const;
  static TransitionModel from_flat(const std::vector<double>& flat, double learning_rate);

  bool operator==(const TransitionModel&) const = default;

 private:
  Row& row_mut(int state, Action a);

  std::vector<Row> rows_;  // indexed by state * 2 + action
  double eta_ = 0.5;
};

// Model-based action values per state: a two-step Bellman backup over the
// learned transitions with goal-conditional terminal rewards. Indexed by state;
// terminal states hold zeros.
std::vector<ActionValues> mb_values(const TransitionModel& model, const env::TaskGraph& graph,
                                    Goal goal);

}  // namespace mdtlab::rl
