#include "mdtlab/rl/basic_agents.hpp"

#include "mdtlab/rl/policy.hpp"

namespace mdtlab::rl {

nlohmann::json RandomAgent::checkpoint() const { return checkpoint_header(kind()); }

void RandomAgent::restore(const nlohmann::json& j) { check_checkpoint(j, kind()); }

SarsaAgent::SarsaAgent(SarsaParams params, int n_states)
    : params_(params), q_(n_observations(n_states)) {}

void SarsaAgent::begin_task(const env::TaskGraph&) { pending_.reset(); }

ActionDist SarsaAgent::act(const Observation& obs) {
  return softmax_policy(q_.values(obs.index()), params_.inv_temp);
}

void SarsaAgent::observe(const Experience& e) {
  const double alpha = frozen() ? 0.0 : params_.alpha;
  if (pending_) {
    sarsa_update(q_, pending_->obs.index(), pending_->action, pending_->reward, e.obs.index(),
                 e.action, alpha, params_.gamma);
    pending_.reset();
  }
  if (e.done)
    sarsa_update_terminal(q_, e.obs.index(), e.action, e.reward, alpha);
  else
    pending_ = e;
}

nlohmann::json SarsaAgent::checkpoint() const {
  auto j = checkpoint_header(kind());
  j["params"] = {{"alpha", params_.alpha}, {"gamma", params_.gamma}, {"inv_temp", params_.inv_temp}};
  j["arrays"] = {{"q", q_.raw()}};
  return j;
}

void SarsaAgent::restore(const nlohmann::json& j) {
  check_checkpoint(j, kind());
  const auto& p = j.at("params");
  params_ = {p.at("alpha").get<double>(), p.at("gamma").get<double>(), p.at("inv_temp").get<double>()};
  q_.raw() = j.at("arrays").at("q").get<std::vector<double>>();
  pending_.reset();
}

std::uint64_t SarsaAgent::learnable_hash() const {
  return hash_doubles(q_.raw(), hash_doubles({params_.alpha, params_.gamma, params_.inv_temp}));
}

}  // namespace mdtlab::rl
