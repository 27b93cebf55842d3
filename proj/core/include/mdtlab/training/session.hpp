#pragma once

#include <cstdint>
#include <string>

#include "mdtlab/data/dataset.hpp"
#include "mdtlab/env/task.hpp"
#include "mdtlab/rl/agent.hpp"

namespace mdtlab::training {

// WeightsOnly: fast state (recurrent state, arbitration weight, within-session
// values) evolves across trials. FullState: fast state is restored to its
// session-start value before every trial.
enum class FreezeMode { kWeightsOnly, kFullState };
std::string_view to_string(FreezeMode m);
FreezeMode parse_freeze_mode(std::string_view s);

struct SessionOptions {
  std::string subject_id = "sim";
  std::uint64_t action_seed = 0;
  FreezeMode freeze_mode = FreezeMode::kWeightsOnly;
};

// Plays one session of `spec` with `agent` (as given: frozen or not) and
// records it in the dataset schema.
data::SubjectDataset run_session(rl::Agent& agent, const env::TaskSpec& spec, const SessionOptions& opt);

// Runs a frozen copy of `agent` for n_trials on `spec`. The agent itself is
// not modified.
data::SubjectDataset freeze_and_evaluate(const rl::Agent& agent, const env::TaskSpec& spec, int n_trials,
                                         const SessionOptions& opt);

}  // namespace mdtlab::training
