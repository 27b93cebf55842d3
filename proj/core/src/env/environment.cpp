#include "mdtlab/env/environment.hpp"

#include "mdtlab/error.hpp"

namespace mdtlab::env {

namespace {
constexpr std::uint64_t kPathStream = 1;
constexpr std::uint64_t kGoalStream = 2;
constexpr std::uint64_t kTransitionStream = 3;
}  // namespace

std::vector<double> materialize_p_path(const UncertaintyDynamics& d, int n_trials, Rng& rng) {
  std::vector<double> path(static_cast<std::size_t>(n_trials));
  auto regime_p = [&](int t) { return (t / d.switch_block) % 2 == 0 ? d.switch_low_p : d.switch_high_p; };
  double p = d.kind == DynamicsKind::kDriftSwitch ? d.switch_low_p : d.fixed_p;
  for (int t = 0; t < n_trials; ++t) {
    switch (d.kind) {
      case DynamicsKind::kFixed:
        p = d.fixed_p;
        break;
      case DynamicsKind::kDrift:
        if (t > 0) p = reflect(p + d.drift_sigma * rng.normal(), d.drift_lo, d.drift_hi);
        break;
      case DynamicsKind::kSwitch:
        p = regime_p(t);
        break;
      case DynamicsKind::kDriftSwitch:
        if (t % d.switch_block == 0)
          p = regime_p(t);
        else
          p = reflect(p + d.drift_sigma * rng.normal(), d.drift_lo, d.drift_hi);
        break;
    }
    path[t] = p;
  }
  return path;
}

Environment::Environment(TaskSpec spec)
    : spec_(std::move(spec)), transition_rng_(derive_seed(spec_.env_seed, {kTransitionStream})) {
  spec_.validate();
  Rng path_rng(derive_seed(spec_.env_seed, {kPathStream}));
  p_path_ = materialize_p_path(spec_.dynamics, spec_.n_trials, path_rng);
  if (!spec_.goal_schedule.empty()) {
    goals_.assign(spec_.goal_schedule.begin(), spec_.goal_schedule.begin() + spec_.n_trials);
  } else {
    Rng goal_rng(derive_seed(spec_.env_seed, {kGoalStream}));
    const auto k = static_cast<std::int64_t>(spec_.goal_alphabet.size());
    goals_.reserve(spec_.n_trials);
    for (int t = 0; t < spec_.n_trials; ++t)
      goals_.push_back(spec_.goal_alphabet[goal_rng.uniform_int(0, k - 1)]);
  }
  state_ = graph().root();
}

std::array<double, 2> Environment::transition_row(int state, Action) const {
  if (graph().stage_of(state) == 3) return {0.0, 0.0};
  const double p = transition_p();
  return {p, 1.0 - p};
}

StepResult Environment::step(Action action) {
  if (trial_done_ || graph().stage_of(state_) == 3)
    throw ProtocolError("step called on terminal state " + graph().node(state_).name);
  const auto& succ = graph().successors(state_, action);
  const double u = transition_rng_.uniform();
  state_ = u < transition_p() ? succ[0] : succ[1];
  StepResult r;
  r.next_state = state_;
  r.stage = graph().stage_of(state_);
  if (r.stage == 3) {
    r.trial_done = true;
    r.reward = goal_reward(graph(), state_, current_goal());
    r.token_color = graph().node(state_).color;
    trial_done_ = true;
  }
  return r;
}

bool Environment::advance_trial() {
  if (!trial_done_) throw ProtocolError("advance_trial called before the trial finished");
  if (trial_ + 1 >= spec_.n_trials) return false;
  ++trial_;
  state_ = graph().root();
  trial_done_ = false;
  return true;
}

IdealChoice Environment::ideal_action(int state) const {
  return ideal_choice(graph(), transition_p(), current_goal(), state);
}

double Environment::max_trial_value() const {
  return ideal_root_value(graph(), transition_p(), current_goal());
}

}  // namespace mdtlab::env
