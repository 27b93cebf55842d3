#pragma once

#include "mdtlab/nn/tensor.hpp"
#include "mdtlab/rl/observation.hpp"

namespace mdtlab::deep {

// One-hot over the state x goal cross product.
nn::Vector encode_observation(const rl::Observation& obs, int n_states);

// Observation one-hot followed by the previous action (2) and previous
// reward (one-hot over the token values 0/10/20/40).
nn::Vector encode_meta_input(const rl::Observation& obs, int n_states, rl::Action prev_action,
                             double prev_reward);

inline int meta_input_size(int n_states) { return rl::n_observations(n_states) + 2 + 4; }

}  // namespace mdtlab::deep
