#include "mdtlab/deep/ddqn_agent.hpp"

#include <algorithm>
#include <cmath>

#include "mdtlab/deep/encoding.hpp"
#include "mdtlab/error.hpp"
#include "mdtlab/rl/policy.hpp"

namespace mdtlab::deep {

using nlohmann::json;

json DdqnConfig::to_json() const {
  return {{"hidden", hidden},
          {"gamma", gamma},
          {"learning_rate", learning_rate},
          {"tau", tau},
          {"batch_size", batch_size},
          {"replay_capacity", replay_capacity},
          {"epsilon_start", epsilon_start},
          {"epsilon_end", epsilon_end},
          {"epsilon_anneal_steps", epsilon_anneal_steps},
          {"reward_scale", reward_scale},
          {"inv_temp", inv_temp},
          {"n_states", n_states},
          {"seed", seed}};
}

DdqnConfig DdqnConfig::from_json(const json& j) {
  DdqnConfig c;
  c.hidden = j.value("hidden", c.hidden);
  c.gamma = j.value("gamma", c.gamma);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.tau = j.value("tau", c.tau);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.replay_capacity = j.value("replay_capacity", c.replay_capacity);
  c.epsilon_start = j.value("epsilon_start", c.epsilon_start);
  c.epsilon_end = j.value("epsilon_end", c.epsilon_end);
  c.epsilon_anneal_steps = j.value("epsilon_anneal_steps", c.epsilon_anneal_steps);
  c.reward_scale = j.value("reward_scale", c.reward_scale);
  c.inv_temp = j.value("inv_temp", c.inv_temp);
  c.n_states = j.value("n_states", c.n_states);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

void DdqnConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("ddqn: gamma must lie in [0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("ddqn: tau must lie in (0, 1]");
  if (batch_size <= 0) throw ConfigError("ddqn: batch_size must be positive");
  if (replay_capacity < batch_size) throw ConfigError("ddqn: replay_capacity must be at least batch_size");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0))
    throw ConfigError("ddqn: epsilon values must lie in [0, 1]");
  if (epsilon_anneal_steps < 0) throw ConfigError("ddqn: epsilon_anneal_steps must be non-negative");
  if (!(inv_temp >= 0.0)) throw ConfigError("ddqn: inv_temp must be non-negative");
  if (n_states <= 0) throw ConfigError("ddqn: n_states must be positive");
  for (int h : hidden)
    if (h <= 0) throw ConfigError("ddqn: hidden sizes must be positive");
}

double ddqn_target(double reward, bool done, double gamma, const rl::ActionValues& q_online_next,
                   const rl::ActionValues& q_target_next) {
  if (done) return reward;
  const int a = q_online_next[1] > q_online_next[0] ? 1 : 0;
  return reward + gamma * q_target_next[a];
}

DdqnAgent::DdqnAgent(DdqnConfig config)
    : config_(std::move(config)), replay_(static_cast<std::size_t>(std::max(1, config_.replay_capacity))),
      rng_(config_.seed) {
  config_.validate();
  std::vector<int> sizes{rl::n_observations(config_.n_states)};
  sizes.insert(sizes.end(), config_.hidden.begin(), config_.hidden.end());
  sizes.push_back(2);
  Rng init(derive_seed(config_.seed, {1}));
  online_ = nn::DenseNet(sizes, init);
  target_ = online_;
  adam_ = nn::Adam(online_.n_params(), {config_.learning_rate});
  rng_ = Rng(derive_seed(config_.seed, {2}));
}

void DdqnAgent::begin_task(const env::TaskGraph& graph) {
  if (graph.n_states() > config_.n_states)
    throw ConfigError("ddqn: task has " + std::to_string(graph.n_states()) + " states, encoder supports " +
                      std::to_string(config_.n_states));
}

rl::ActionValues DdqnAgent::q_values(const rl::Observation& obs) const {
  const nn::Vector q = online_.forward(encode_observation(obs, config_.n_states));
  return {q(0), q(1)};
}

double DdqnAgent::epsilon() const {
  if (config_.epsilon_anneal_steps <= 0) return config_.epsilon_end;
  const double frac = std::min(1.0, static_cast<double>(env_steps_) /
                                        static_cast<double>(config_.epsilon_anneal_steps));
  return config_.epsilon_start + frac * (config_.epsilon_end - config_.epsilon_start);
}

void DdqnAgent::set_inv_temp(double beta) {
  if (!(beta >= 0.0)) throw ConfigError("ddqn: inv_temp must be non-negative");
  config_.inv_temp = beta;
}

void DdqnAgent::set_epsilon_schedule(long anneal_steps) {
  require_unfrozen("DdqnAgent::set_epsilon_schedule");
  if (anneal_steps < 0) throw ConfigError("ddqn: epsilon_anneal_steps must be non-negative");
  config_.epsilon_anneal_steps = anneal_steps;
}

rl::ActionDist DdqnAgent::act(const rl::Observation& obs) {
  const auto q = q_values(obs);
  if (policy_ == Policy::kSoftmax) return rl::softmax_policy(q, config_.inv_temp);
  return rl::epsilon_greedy(q, epsilon());
}

void DdqnAgent::observe(const rl::Experience& e) {
  if (frozen() || !learning_) return;
  replay_.push({e.obs.index(), env::index(e.action), e.reward * config_.reward_scale,
                e.done ? 0 : e.next_obs.index(), e.done});
  ++env_steps_;
  last_loss_ = train_step();
}

DdqnLoss ddqn_loss(const nn::DenseNet& online, const nn::DenseNet& target, const std::vector<Transition>& batch,
                   double gamma, int n_states) {
  const auto B = static_cast<Eigen::Index>(batch.size());
  const int n_obs = rl::n_observations(n_states);
  nn::Matrix x = nn::Matrix::Zero(n_obs, B);
  nn::Matrix xn = x;
  for (Eigen::Index k = 0; k < B; ++k) {
    x(batch[k].obs, k) = 1.0;
    xn(batch[k].next_obs, k) = 1.0;
  }
  const nn::Matrix q_on_next = online.forward(xn);
  const nn::Matrix q_tg_next = target.forward(xn);
  nn::DenseNet::Cache cache;
  const nn::Matrix q = online.forward(x, &cache);
  nn::Matrix dy = nn::Matrix::Zero(2, B);
  DdqnLoss out;
  for (Eigen::Index k = 0; k < B; ++k) {
    const double y = ddqn_target(batch[k].reward, batch[k].done, gamma, {q_on_next(0, k), q_on_next(1, k)},
                                 {q_tg_next(0, k), q_tg_next(1, k)});
    const double err = q(batch[k].action, k) - y;
    out.loss += err * err;
    dy(batch[k].action, k) = 2.0 * err / static_cast<double>(B);
  }
  out.loss /= static_cast<double>(B);
  out.grad = online.flatten(online.backward(cache, dy));
  return out;
}

void soft_update(nn::DenseNet& target, const nn::DenseNet& online, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("soft_update: tau must lie in [0, 1]");
  if (tau == 1.0) {
    target.set_flat(online.flat());
    return;
  }
  target.set_flat(tau * online.flat() + (1.0 - tau) * target.flat());
}

std::optional<double> DdqnAgent::train_step() {
  require_unfrozen("DdqnAgent::train_step");
  const auto B = static_cast<std::size_t>(config_.batch_size);
  if (replay_.size() < B) return std::nullopt;
  const auto result = ddqn_loss(online_, target_, replay_.sample(B, rng_), config_.gamma, config_.n_states);
  nn::Vector params = online_.flat();
  adam_.step(params, result.grad);
  online_.set_flat(params);
  soft_update(target_, online_, config_.tau);
  ++train_steps_;
  return result.loss;
}

json DdqnAgent::checkpoint() const {
  json j = rl::checkpoint_header(kind());
  j["params"] = config_.to_json();
  j["online"] = online_.to_json("online");
  j["target"] = target_.to_json("target");
  j["adam"] = adam_.to_json();
  j["replay"] = replay_.to_json();
  j["rng"] = rng_.serialize();
  j["env_steps"] = env_steps_;
  j["train_steps"] = train_steps_;
  j["policy"] = policy_ == Policy::kSoftmax ? "softmax" : "epsilon_greedy";
  return j;
}

void DdqnAgent::restore(const json& j) {
  rl::check_checkpoint(j, kind());
  config_ = DdqnConfig::from_json(j.at("params"));
  online_.from_json(j.at("online"), "online");
  target_.from_json(j.at("target"), "target");
  adam_.from_json(j.at("adam"));
  replay_ = ReplayBuffer::from_json(j.at("replay"));
  rng_.deserialize(j.at("rng").get<std::string>());
  env_steps_ = j.at("env_steps").get<long>();
  train_steps_ = j.at("train_steps").get<long>();
  policy_ = j.value("policy", "epsilon_greedy") == "softmax" ? Policy::kSoftmax : Policy::kEpsilonGreedy;
}

std::uint64_t DdqnAgent::learnable_hash() const {
  return rl::hash_doubles(nn::to_std(target_.flat()), rl::hash_doubles(nn::to_std(online_.flat())));
}

}  // namespace mdtlab::deep
