#include "mdtlab/rl/transition_model.hpp"

#include <algorithm>

#include "mdtlab/error.hpp"

namespace mdtlab::rl {

namespace {
const TransitionModel::Row kEmptyRow;
}

TransitionModel::TransitionModel(const env::TaskGraph& graph, double learning_rate)
    : eta_(learning_rate) {
  adapt(graph);
}

void TransitionModel::adapt(const env::TaskGraph& graph) {
  for (int s = 0; s < graph.n_states(); ++s) {
    if (graph.stage_of(s) == 3) continue;
    for (int a = 0; a < env::kNumActions; ++a) {
      auto& r = row_mut(s, env::action_from_index(a));
      if (!r.empty()) continue;
      const auto& succ = graph.successors(s, env::action_from_index(a));
      r = {{succ[0], 0.5}, {succ[1], 0.5}};
    }
  }
}

TransitionModel::Row& TransitionModel::row_mut(int state, Action a) {
  const auto i = static_cast<std::size_t>(state) * 2 + static_cast<std::size_t>(env::index(a));
  if (i >= rows_.size()) rows_.resize(i + 1);
  return rows_[i];
}

const TransitionModel::Row& TransitionModel::row(int state, Action a) const {
  const auto i = static_cast<std::size_t>(state) * 2 + static_cast<std::size_t>(env::index(a));
  return i < rows_.size() ? rows_[i] : kEmptyRow;
}

double TransitionModel::prob(int state, Action a, int next) const {
  for (const auto& e : row(state, a))
    if (e.next == next) return e.prob;
  return 0.0;
}

double TransitionModel::update(int state, Action a, int next) {
  auto& r = row_mut(state, a);
  auto it = std::find_if(r.begin(), r.end(), [next](const Entry& e) { return e.next == next; });
  if (it == r.end()) {
    if (r.empty()) {
      r.push_back({next, 1.0});
      return 1.0;
    }
    for (auto& e : r) e.prob *= (1.0 - eta_);
    r.push_back({next, eta_});
    return 1.0;
  }
  const double spe = 1.0 - it->prob;
  if (eta_ == 0.0) return spe;
  for (auto& e : r) e.prob *= (1.0 - eta_);
  it->prob += eta_;
  // Renormalize against rounding drift.
  double total = 0.0;
  for (const auto& e : r) total += e.prob;
  for (auto& e : r) e.prob /= total;
  return spe;
}

std::vector<double> TransitionModel::to_flat() const {
  std::vector<double> flat;
  for (std::size_t i = 0; i < rows_.size(); ++i)
    for (const auto& e : rows_[i]) {
      flat.push_back(static_cast<double>(i / 2));
      flat.push_back(static_cast<double>(i % 2));
      flat.push_back(static_cast<double>(e.next));
      flat.push_back(e.prob);
    }
  return flat;
}

TransitionModel TransitionModel::from_flat(const std::vector<double>& flat, double learning_rate) {
  if (flat.size() % 4 != 0) throw SchemaError("transition model array length must be a multiple of 4");
  TransitionModel m;
  m.eta_ = learning_rate;
  for (std::size_t i = 0; i < flat.size(); i += 4) {
    auto& r = m.row_mut(static_cast<int>(flat[i]), env::action_from_index(static_cast<int>(flat[i + 1])));
    r.push_back({static_cast<int>(flat[i + 2]), flat[i + 3]});
  }
  return m;
}

std::vector<ActionValues> mb_values(const TransitionModel& model, const env::TaskGraph& graph,
                                    Goal goal) {
  const int n = graph.n_states();
  std::vector<ActionValues> q(static_cast<std::size_t>(n), ActionValues{0.0, 0.0});
  auto reward = [&](int s) {
    return s >= 0 && s < n ? env::goal_reward(graph, s, goal) : 0.0;
  };
  for (int s = 0; s < n; ++s) {
    if (graph.stage_of(s) != 2) continue;
    for (int a = 0; a < env::kNumActions; ++a) {
      double v = 0.0;
      for (const auto& e : model.row(s, env::action_from_index(a))) v += e.prob * reward(e.next);
      q[s][a] = v;
    }
  }
  for (int s = 0; s < n; ++s) {
    if (graph.stage_of(s) != 1) continue;
    for (int a = 0; a < env::kNumActions; ++a) {
      double v = 0.0;
      for (const auto& e : model.row(s, env::action_from_index(a))) {
        if (e.next < 0 || e.next >= n || graph.stage_of(e.next) != 2) continue;
        v += e.prob * std::max(q[e.next][0], q[e.next][1]);
      }
      q[s][a] = v;
    }
  }
  return q;
}

}  // namespace mdtlab::rl
