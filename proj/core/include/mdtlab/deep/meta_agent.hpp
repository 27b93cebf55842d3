#pragma once

#include <optional>
#include <vector>

#include "mdtlab/nn/adam.hpp"
#include "mdtlab/nn/lstm.hpp"
#include "mdtlab/rl/agent.hpp"

namespace mdtlab::deep {

struct MetaConfig {
  int hidden_size = 256;
  double gamma = 0.9;
  double entropy_coef = 0.05;
  double value_coef = 0.5;
  double grad_clip = 40.0;
  double learning_rate = 1e-3;
  double reward_scale = 1.0 / 40.0;
  int n_states = 9;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static MetaConfig from_json(const nlohmann::json& j);
  void validate() const;
};

struct A2cRollout {
  std::vector<nn::Vector> inputs;
  std::vector<int> actions;
  std::vector<double> rewards;  // already scaled
};

struct A2cCoefficients {
  double gamma = 0.9;
  double entropy = 0.05;
  double value = 0.5;
};

struct A2cResult {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  std::vector<double> returns;
  std::vector<double> advantages;
  nn::LstmPolicyNet::Gradients grads;
};

// Actor-critic loss over one rollout started from a zero recurrent state:
//   sum_t -log pi(a_t) A_t + value * 0.5 sum_t (G_t - V_t)^2 - entropy * sum_t H_t
// with G_t the discounted return and A_t = G_t - V_t held constant. Passing
// `fixed_advantages` evaluates the loss with those advantages instead.
A2cResult a2c_loss(const nn::LstmPolicyNet& net, const A2cRollout& rollout, const A2cCoefficients& c,
                   const std::vector<double>* fixed_advantages = nullptr);

// Recurrent actor-critic agent. One episode is a session of many trials; the
// recurrent state carries across trials and one update is made per episode.
class MetaAgent final : public rl::Agent {
 public:
  explicit MetaAgent(MetaConfig config = {});

  std::string kind() const override { return "meta"; }
  std::unique_ptr<rl::Agent> clone() const override { return std::make_unique<MetaAgent>(*this); }
  bool recurrent() const override { return true; }
  void begin_task(const env::TaskGraph& graph) override;
  void reset_episode() override;
  rl::ActionDist act(const rl::Observation& obs) override;
  void observe(const rl::Experience& e) override;
  nlohmann::json checkpoint() const override;
  void restore(const nlohmann::json& j) override;
  nlohmann::json fast_state() const override;
  void set_fast_state(const nlohmann::json& j) override;
  std::uint64_t learnable_hash() const override;

  // Applies the episode's update (unless frozen) and clears the rollout.
  // Returns the loss when an update was made.
  std::optional<double> end_episode();
  std::optional<double> update(const A2cRollout& rollout);

  const MetaConfig& config() const { return config_; }
  const nn::LstmPolicyNet& net() const { return net_; }
  const A2cRollout& rollout() const { return rollout_; }
  long updates() const { return adam_.steps(); }

 private:
  MetaConfig config_;
  nn::LstmPolicyNet net_;
  nn::Adam adam_;
  nn::Vector h_, c_;
  rl::Action prev_action_ = rl::Action::kLeft;
  double prev_reward_ = 0.0;
  struct Pending {
    rl::Observation obs;
    nn::Vector input;
    nn::Vector h, c;
  };
  std::optional<Pending> pending_;
  A2cRollout rollout_;
};

}  // namespace mdtlab::deep
