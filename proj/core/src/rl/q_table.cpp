#include "mdtlab/rl/q_table.hpp"

namespace mdtlab::rl {

void QTable::set(int obs, Action a, double v) {
  const auto i = slot(obs, a);
  if (i >= values_.size()) values_.resize((static_cast<std::size_t>(obs) + 1) * 2, 0.0);
  values_[i] = v;
}

double sarsa_update(QTable& q, int obs, Action a, double reward, int next_obs, Action next_a,
                    double alpha, double gamma) {
  const double delta = reward + gamma * q.get(next_obs, next_a) - q.get(obs, a);
  if (alpha != 0.0) q.set(obs, a, q.get(obs, a) + alpha * delta);
  return delta;
}

double sarsa_update_terminal(QTable& q, int obs, Action a, double reward, double alpha) {
  const double delta = reward - q.get(obs, a);
  if (alpha != 0.0) q.set(obs, a, q.get(obs, a) + alpha * delta);
  return delta;
}

}  // namespace mdtlab::rl
