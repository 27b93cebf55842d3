#include "mdtlab/training/session.hpp"

#include "mdtlab/env/environment.hpp"
#include "mdtlab/error.hpp"
#include "mdtlab/rl/policy.hpp"

namespace mdtlab::training {

std::string_view to_string(FreezeMode m) {
  return m == FreezeMode::kWeightsOnly ? "weights_only" : "full_state";
}

FreezeMode parse_freeze_mode(std::string_view s) {
  if (s == "weights_only") return FreezeMode::kWeightsOnly;
  if (s == "full_state") return FreezeMode::kFullState;
  throw ConfigError("unknown freeze mode '" + std::string(s) + "'");
}

namespace {

int block_of(const env::TaskSpec& spec, int trial) {
  const auto k = spec.dynamics.kind;
  if (k == env::DynamicsKind::kSwitch || k == env::DynamicsKind::kDriftSwitch)
    return trial / spec.dynamics.switch_block;
  return -1;
}

}  // namespace

data::SubjectDataset run_session(rl::Agent& agent, const env::TaskSpec& spec, const SessionOptions& opt) {
  env::Environment environment(spec);
  Rng rng(opt.action_seed);
  agent.begin_task(spec.graph);
  agent.reset_episode();
  nlohmann::json snapshot;
  if (opt.freeze_mode == FreezeMode::kFullState) snapshot = agent.fast_state();

  data::SubjectDataset ds;
  ds.subject_id = opt.subject_id;
  ds.task_id = spec.id;
  ds.records.reserve(spec.n_trials);
  do {
    if (opt.freeze_mode == FreezeMode::kFullState) agent.set_fast_state(snapshot);
    data::BehaviorRecord r;
    r.trial = environment.trial_index();
    r.goal = environment.current_goal();
    r.p_transition = environment.transition_p();
    r.uncertainty = environment.uncertainty();
    r.block = block_of(spec, r.trial);
    r.s1 = environment.current_state();
    const rl::Observation o1{r.s1, r.goal};
    r.a1 = rl::sample_action(agent.act(o1), rng);
    const auto step1 = environment.step(r.a1);
    r.s2 = step1.next_state;
    const rl::Observation o2{r.s2, r.goal};
    agent.observe({o1, r.a1, step1.reward, o2, false});
    r.a2 = rl::sample_action(agent.act(o2), rng);
    const auto step2 = environment.step(r.a2);
    r.s3 = step2.next_state;
    r.reward = step2.reward;
    agent.observe({o2, r.a2, step2.reward, {r.s3, r.goal}, true});
    ds.records.push_back(r);
  } while (environment.advance_trial());
  return ds;
}

data::SubjectDataset freeze_and_evaluate(const rl::Agent& agent, const env::TaskSpec& spec, int n_trials,
                                         const SessionOptions& opt) {
  if (n_trials <= 0) throw ConfigError("freeze_and_evaluate: n_trials must be positive");
  auto copy = agent.clone();
  copy->set_frozen(true);
  env::TaskSpec s = spec;
  s.n_trials = n_trials;
  s.goal_schedule.resize(std::min<std::size_t>(s.goal_schedule.size(), static_cast<std::size_t>(n_trials)));
  auto ds = run_session(*copy, s, opt);
  ds.provenance.kind = "synthetic";
  ds.provenance.detail = {{"agent", agent.kind()},
                          {"task", spec.id},
                          {"freeze_mode", to_string(opt.freeze_mode)},
                          {"action_seed", opt.action_seed}};
  return ds;
}

}  // namespace mdtlab::training
