#pragma once

#include <cstddef>
#include <functional>

namespace mdtlab::experiment {

// Runs fn(0) .. fn(n-1) on up to `jobs` threads. Items are claimed in index
// order; each item must only touch its own outputs. If items throw, every
// remaining item still runs and the exception of the lowest failing index is
// rethrown afterwards.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace mdtlab::experiment
