#pragma once

#include "mdtlab/rl/observation.hpp"
#include "mdtlab/rng.hpp"

namespace mdtlab::rl {

// p(a) proportional to exp(inv_temp * Q(a)), evaluated with max subtraction.
ActionDist softmax_policy(const ActionValues& q, double inv_temp);

ActionDist epsilon_greedy(const ActionValues& q, double epsilon);

Action sample_action(const ActionDist& dist, Rng& rng);

}  // namespace mdtlab::rl
