#include "mdtlab/deep/encoding.hpp"

#include <string>

#include "mdtlab/error.hpp"

namespace mdtlab::deep {

namespace {

int checked_index(const rl::Observation& obs, int n_states) {
  if (obs.state < 0 || obs.state >= n_states)
    throw ConfigError("observation state " + std::to_string(obs.state) + " outside the encoder range [0, " +
                      std::to_string(n_states) + ")");
  return obs.index();
}

}  // namespace

nn::Vector encode_observation(const rl::Observation& obs, int n_states) {
  nn::Vector v = nn::Vector::Zero(rl::n_observations(n_states));
  v(checked_index(obs, n_states)) = 1.0;
  return v;
}

nn::Vector encode_meta_input(const rl::Observation& obs, int n_states, rl::Action prev_action,
                             double prev_reward) {
  const int n_obs = rl::n_observations(n_states);
  const int r = env::token_index(prev_reward);
  if (r < 0) throw ConfigError("reward " + std::to_string(prev_reward) + " is not a token value");
  nn::Vector v = nn::Vector::Zero(meta_input_size(n_states));
  v(checked_index(obs, n_states)) = 1.0;
  v(n_obs + env::index(prev_action)) = 1.0;
  v(n_obs + 2 + r) = 1.0;
  return v;
}

}  // namespace mdtlab::deep
