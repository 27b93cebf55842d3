#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdtlab/env/task.hpp"
#include "mdtlab/rl/observation.hpp"

namespace mdtlab::rl {

// One agent-environment step. Stage-1 steps carry reward 0 and done = false;
// the stage-2 step lands on a terminal with done = true.
struct Experience {
  Observation obs;
  Action action = Action::kLeft;
  double reward = 0.0;
  Observation next_obs;
  bool done = false;
};

inline constexpr std::string_view kCheckpointSchema = "mdtlab.checkpoint/1";

// Common agent contract.
//
// Freezing locks the learnable weights/parameters; internal fast state
// (recurrent state, arbitration weight, within-session value tables) still
// evolves unless the caller restores it between trials.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string kind() const = 0;
  virtual std::unique_ptr<Agent> clone() const = 0;

  // Agents whose act/observe calls must strictly alternate because they carry
  // recurrent state between steps.
  virtual bool recurrent() const { return false; }

  // Called when the agent is placed in a (possibly new) task. Token positions
  // are visible to the agent through the graph.
  virtual void begin_task(const env::TaskGraph& graph) = 0;
  // Start of a session: within-session state returns to its initial value.
  virtual void reset_episode() {}

  virtual ActionDist act(const Observation& obs) = 0;
  virtual void observe(const Experience& e) = 0;

  // Serialized state: schema tag, kind, named parameters and float arrays.
  virtual nlohmann::json checkpoint() const = 0;
  virtual void restore(const nlohmann::json& j) = 0;

  // Within-session state that evolves under freezing. Restoring it before
  // each trial removes all carry-over between trials.
  virtual nlohmann::json fast_state() const { return checkpoint(); }
  virtual void set_fast_state(const nlohmann::json& j) { restore(j); }

  // Hash of everything freezing must hold constant.
  virtual std::uint64_t learnable_hash() const = 0;

  void set_frozen(bool frozen) { frozen_ = frozen; }
  bool frozen() const { return frozen_; }

  // Throws ProtocolError when frozen.
  void require_unfrozen(const char* what) const;

 protected:

 private:
  bool frozen_ = false;
};

// Helpers for the checkpoint layout shared by every agent.
nlohmann::json checkpoint_header(std::string_view kind);
void check_checkpoint(const nlohmann::json& j, std::string_view kind);
std::uint64_t hash_doubles(const std::vector<double>& v, std::uint64_t seed = 0);

}  // namespace mdtlab::rl
