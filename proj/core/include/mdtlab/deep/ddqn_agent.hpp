#pragma once

#include <optional>
#include <vector>

#include "mdtlab/deep/replay_buffer.hpp"
#include "mdtlab/nn/adam.hpp"
#include "mdtlab/nn/dense.hpp"
#include "mdtlab/rl/agent.hpp"

namespace mdtlab::deep {

struct DdqnConfig {
  std::vector<int> hidden = {64, 64};
  double gamma = 0.99;
  double learning_rate = 1e-3;
  double tau = 1e-3;
  int batch_size = 32;
  int replay_capacity = 10000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.1;
  long epsilon_anneal_steps = 0;  // 0: epsilon_end from the start
  double reward_scale = 1.0 / 40.0;
  double inv_temp = 1.0;          // softmax read-out of the Q-values
  int n_states = 9;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static DdqnConfig from_json(const nlohmann::json& j);
  void validate() const;
};

// Double-DQN regression target: the online net picks the next action, the
// target net evaluates it. Ties go to Left.
double ddqn_target(double reward, bool done, double gamma, const rl::ActionValues& q_online_next,
                   const rl::ActionValues& q_target_next);

struct DdqnLoss {
  double loss = 0.0;
  nn::Vector grad;  // d loss / d online parameters, targets held fixed
};

// Mean squared TD error of `online` on a minibatch against double-DQN targets.
DdqnLoss ddqn_loss(const nn::DenseNet& online, const nn::DenseNet& target, const std::vector<Transition>& batch,
                   double gamma, int n_states);

// theta_target <- tau * theta_online + (1 - tau) * theta_target.
void soft_update(nn::DenseNet& target, const nn::DenseNet& online, double tau);

class DdqnAgent final : public rl::Agent {
 public:
  enum class Policy { kEpsilonGreedy, kSoftmax };

  explicit DdqnAgent(DdqnConfig config = {});

  std::string kind() const override { return "ddqn"; }
  std::unique_ptr<rl::Agent> clone() const override { return std::make_unique<DdqnAgent>(*this); }
  void begin_task(const env::TaskGraph& graph) override;
  rl::ActionDist act(const rl::Observation& obs) override;
  void observe(const rl::Experience& e) override;
  nlohmann::json checkpoint() const override;
  void restore(const nlohmann::json& j) override;
  nlohmann::json fast_state() const override { return nlohmann::json::object(); }
  void set_fast_state(const nlohmann::json&) override {}
  std::uint64_t learnable_hash() const override;

  rl::ActionValues q_values(const rl::Observation& obs) const;

  // One gradient step on a replay minibatch. Empty when the buffer holds
  // fewer than batch_size transitions.
  std::optional<double> train_step();

  // Learning on observe (push + train_step) is on by default.
  void set_learning(bool on) { learning_ = on; }
  bool learning() const { return learning_; }

  void set_policy(Policy p) { policy_ = p; }
  Policy policy() const { return policy_; }
  double epsilon() const;
  void set_inv_temp(double beta);
  void set_epsilon_schedule(long anneal_steps);

  const DdqnConfig& config() const { return config_; }
  const nn::DenseNet& online() const { return online_; }
  const nn::DenseNet& target() const { return target_; }
  const ReplayBuffer& replay() const { return replay_; }
  long env_steps() const { return env_steps_; }
  long train_steps() const { return train_steps_; }
  const std::optional<double>& last_loss() const { return last_loss_; }

 private:
  DdqnConfig config_;
  nn::DenseNet online_, target_;
  nn::Adam adam_;
  ReplayBuffer replay_;
  Rng rng_;
  Policy policy_ = Policy::kEpsilonGreedy;
  bool learning_ = true;
  long env_steps_ = 0;
  long train_steps_ = 0;
  std::optional<double> last_loss_;
};

}  // namespace mdtlab::deep
