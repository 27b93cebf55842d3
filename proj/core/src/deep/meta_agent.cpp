#include "mdtlab/deep/meta_agent.hpp"

#include <cmath>

#include "mdtlab/deep/encoding.hpp"
#include "mdtlab/error.hpp"

namespace mdtlab::deep {

using nlohmann::json;

json MetaConfig::to_json() const {
  return {{"hidden_size", hidden_size},   {"gamma", gamma},
          {"entropy_coef", entropy_coef}, {"value_coef", value_coef},
          {"grad_clip", grad_clip},       {"learning_rate", learning_rate},
          {"reward_scale", reward_scale}, {"n_states", n_states},
          {"seed", seed}};
}

MetaConfig MetaConfig::from_json(const json& j) {
  MetaConfig c;
  c.hidden_size = j.value("hidden_size", c.hidden_size);
  c.gamma = j.value("gamma", c.gamma);
  c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
  c.value_coef = j.value("value_coef", c.value_coef);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.reward_scale = j.value("reward_scale", c.reward_scale);
  c.n_states = j.value("n_states", c.n_states);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

void MetaConfig::validate() const {
  if (hidden_size <= 0) throw ConfigError("meta: hidden_size must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("meta: gamma must lie in [0, 1]");
  if (!(grad_clip > 0.0)) throw ConfigError("meta: grad_clip must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("meta: learning_rate must be positive");
  if (n_states <= 0) throw ConfigError("meta: n_states must be positive");
}

A2cResult a2c_loss(const nn::LstmPolicyNet& net, const A2cRollout& r, const A2cCoefficients& c,
                   const std::vector<double>* fixed_advantages) {
  const std::size_t T = r.inputs.size();
  if (r.actions.size() != T || r.rewards.size() != T)
    throw ProtocolError("a2c: rollout inputs, actions and rewards differ in length");
  if (fixed_advantages && fixed_advantages->size() != T)
    throw ProtocolError("a2c: advantage vector has the wrong length");
  const int H = net.hidden_size();
  std::vector<nn::LstmPolicyNet::Cache> caches(T);
  std::vector<nn::Vector> probs(T);
  std::vector<double> values(T);
  nn::Vector h = nn::Vector::Zero(H), cell = nn::Vector::Zero(H);
  for (std::size_t t = 0; t < T; ++t) {
    auto s = net.step(r.inputs[t], h, cell, &caches[t]);
    const double m = s.logits.maxCoeff();
    nn::Vector e = (s.logits.array() - m).exp().matrix();
    probs[t] = e / e.sum();
    values[t] = s.value;
    h = std::move(s.h);
    cell = std::move(s.c);
  }

  A2cResult out;
  out.returns.assign(T, 0.0);
  double g = 0.0;
  for (std::size_t t = T; t-- > 0;) {
    g = r.rewards[t] + c.gamma * g;
    out.returns[t] = g;
  }
  out.advantages.resize(T);
  for (std::size_t t = 0; t < T; ++t) out.advantages[t] = out.returns[t] - values[t];
  const auto& adv = fixed_advantages ? *fixed_advantages : out.advantages;

  std::vector<nn::Vector> dlogits(T);
  std::vector<double> dvalue(T);
  for (std::size_t t = 0; t < T; ++t) {
    const nn::Vector& p = probs[t];
    const int a = r.actions[t];
    const nn::Vector logp = p.array().max(1e-300).log().matrix();
    const double ent = -(p.array() * logp.array()).sum();
    const double err = out.returns[t] - values[t];
    out.policy_loss += -logp(a) * adv[t];
    out.value_loss += 0.5 * err * err;
    out.entropy += ent;
    nn::Vector d = adv[t] * p;
    d(a) -= adv[t];
    // d(-H)/dz_j = p_j (log p_j + H)
    d += c.entropy * (p.array() * (logp.array() + ent)).matrix();
    dlogits[t] = std::move(d);
    dvalue[t] = -c.value * err;
  }
  out.loss = out.policy_loss + c.value * out.value_loss - c.entropy * out.entropy;
  out.grads = net.bptt(caches, dlogits, dvalue);
  return out;
}

MetaAgent::MetaAgent(MetaConfig config) : config_(std::move(config)) {
  config_.validate();
  Rng init(derive_seed(config_.seed, {1}));
  net_ = nn::LstmPolicyNet(meta_input_size(config_.n_states), config_.hidden_size, init);
  adam_ = nn::Adam(net_.n_params(), {config_.learning_rate});
  reset_episode();
}

void MetaAgent::begin_task(const env::TaskGraph& graph) {
  if (graph.n_states() > config_.n_states)
    throw ConfigError("meta: task has " + std::to_string(graph.n_states()) + " states, encoder supports " +
                      std::to_string(config_.n_states));
}

void MetaAgent::reset_episode() {
  h_ = nn::Vector::Zero(config_.hidden_size);
  c_ = nn::Vector::Zero(config_.hidden_size);
  prev_action_ = rl::Action::kLeft;
  prev_reward_ = 0.0;
  pending_.reset();
  rollout_ = {};
}

rl::ActionDist MetaAgent::act(const rl::Observation& obs) {
  Pending p{obs, encode_meta_input(obs, config_.n_states, prev_action_, prev_reward_), {}, {}};
  auto s = net_.step(p.input, h_, c_);
  p.h = std::move(s.h);
  p.c = std::move(s.c);
  pending_ = std::move(p);
  const double m = s.logits.maxCoeff();
  const double e0 = std::exp(s.logits(0) - m), e1 = std::exp(s.logits(1) - m);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

void MetaAgent::observe(const rl::Experience& e) {
  if (!pending_ || !(pending_->obs == e.obs))
    throw ProtocolError("meta: observe must follow act on the same observation");
  if (env::token_index(e.reward) < 0)
    throw ConfigError("reward " + std::to_string(e.reward) + " is not a token value");
  h_ = std::move(pending_->h);
  c_ = std::move(pending_->c);
  if (!frozen()) {
    rollout_.inputs.push_back(std::move(pending_->input));
    rollout_.actions.push_back(env::index(e.action));
    rollout_.rewards.push_back(e.reward * config_.reward_scale);
  }
  pending_.reset();
  prev_action_ = e.action;
  prev_reward_ = e.reward;
}

std::optional<double> MetaAgent::update(const A2cRollout& rollout) {
  require_unfrozen("MetaAgent::update");
  if (rollout.inputs.empty()) return std::nullopt;
  auto res = a2c_loss(net_, rollout, {config_.gamma, config_.entropy_coef, config_.value_coef});
  nn::Vector grad = net_.flatten(res.grads);
  nn::clip_by_global_norm(grad, config_.grad_clip);
  nn::Vector params = net_.flat();
  adam_.step(params, grad);
  net_.set_flat(params);
  return res.loss;
}

std::optional<double> MetaAgent::end_episode() {
  std::optional<double> loss;
  if (!frozen()) loss = update(rollout_);
  rollout_ = {};
  return loss;
}

json MetaAgent::fast_state() const {
  return {{"h", nn::to_std(h_)},
          {"c", nn::to_std(c_)},
          {"prev_action", env::index(prev_action_)},
          {"prev_reward", prev_reward_}};
}

void MetaAgent::set_fast_state(const json& j) {
  h_ = nn::from_std(j.at("h").get<std::vector<double>>());
  c_ = nn::from_std(j.at("c").get<std::vector<double>>());
  if (h_.size() != config_.hidden_size || c_.size() != config_.hidden_size)
    throw SchemaError("meta: recurrent state has the wrong size");
  prev_action_ = env::action_from_index(j.at("prev_action").get<int>());
  prev_reward_ = j.at("prev_reward").get<double>();
  pending_.reset();
}

json MetaAgent::checkpoint() const {
  json j = rl::checkpoint_header(kind());
  j["params"] = config_.to_json();
  j["net"] = net_.to_json();
  j["adam"] = adam_.to_json();
  j["fast_state"] = fast_state();
  return j;
}

void MetaAgent::restore(const json& j) {
  rl::check_checkpoint(j, kind());
  config_ = MetaConfig::from_json(j.at("params"));
  net_.from_json(j.at("net"));
  adam_.from_json(j.at("adam"));
  set_fast_state(j.at("fast_state"));
  rollout_ = {};
}

std::uint64_t MetaAgent::learnable_hash() const { return rl::hash_doubles(nn::to_std(net_.flat())); }

}  // namespace mdtlab::deep
