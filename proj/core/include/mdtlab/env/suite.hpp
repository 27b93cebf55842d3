#pragma once

#include <vector>

#include "mdtlab/env/task.hpp"

namespace mdtlab::env {

// The ten volatile tasks used for the generalizability battery.
// T01 is a two-step style anchor task, T02-T05 are the ladder structure and
// T06-T09 the tree structure under Fixed/Drift/Switch/DriftSwitch, and T10 is
// the original two-stage task (tree, switching 0.9/0.5 blocks of 20 trials).
std::vector<TaskSpec> canonical_suite();

// The original two-stage task (T10) used for training and subject generation.
TaskSpec original_task(int n_trials = 400);
TaskSpec original_task(int n_trials, std::uint64_t env_seed);

}  // namespace mdtlab::env
