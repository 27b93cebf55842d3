#include "mdtlab/rl/policy.hpp"

#include <algorithm>
#include <cmath>

namespace mdtlab::rl {

ActionDist softmax_policy(const ActionValues& q, double inv_temp) {
  const double m = std::max(q[0], q[1]);
  const double e0 = std::exp(inv_temp * (q[0] - m));
  const double e1 = std::exp(inv_temp * (q[1] - m));
  const double p0 = e0 / (e0 + e1);
  return {p0, 1.0 - p0};
}

ActionDist epsilon_greedy(const ActionValues& q, double epsilon) {
  const double greedy_left = q[1] > q[0] ? 0.0 : 1.0;
  const double p0 = epsilon * 0.5 + (1.0 - epsilon) * greedy_left;
  return {p0, 1.0 - p0};
}

Action sample_action(const ActionDist& dist, Rng& rng) {
  return rng.uniform() < dist[0] ? Action::kLeft : Action::kRight;
}

}  // namespace mdtlab::rl
