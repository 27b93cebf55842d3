#pragma once

#include <optional>

#include "mdtlab/rl/agent.hpp"
#include "mdtlab/rl/q_table.hpp"

namespace mdtlab::rl {

// Control agent: Left and Right with equal probability, no state.
class RandomAgent final : public Agent {
 public:
  std::string kind() const override { return "random"; }
  std::unique_ptr<Agent> clone() const override { return std::make_unique<RandomAgent>(*this); }
  void begin_task(const env::TaskGraph&) override {}
  ActionDist act(const Observation&) override { return {0.5, 0.5}; }
  void observe(const Experience&) override {}
  nlohmann::json checkpoint() const override;
  void restore(const nlohmann::json& j) override;
  std::uint64_t learnable_hash() const override { return 0; }
};

struct SarsaParams {
  double alpha = 0.1;
  double gamma = 1.0;
  double inv_temp = 0.2;
};

// Model-free tabular learner with softmax choice. The Q-table is its
// learnable state, so freezing stops SARSA updates.
class SarsaAgent final : public Agent {
 public:
  explicit SarsaAgent(SarsaParams params = {}, int n_states = 9);

  std::string kind() const override { return "sarsa"; }
  std::unique_ptr<Agent> clone() const override { return std::make_unique<SarsaAgent>(*this); }
  void begin_task(const env::TaskGraph& graph) override;
  void reset_episode() override { pending_.reset(); }
  ActionDist act(const Observation& obs) override;
  void observe(const Experience& e) override;
  nlohmann::json checkpoint() const override;
  void restore(const nlohmann::json& j) override;
  std::uint64_t learnable_hash() const override;

  const QTable& q() const { return q_; }
  QTable& q() { return q_; }
  const SarsaParams& params() const { return params_; }
  void set_params(const SarsaParams& p) { params_ = p; }

 private:
  SarsaParams params_;
  QTable q_;
  std::optional<Experience> pending_;
};

}  // namespace mdtlab::rl
