#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdtlab/rng.hpp"

namespace mdtlab::deep {

struct Transition {
  int obs = 0;       // observation index
  int action = 0;
  double reward = 0.0;
  int next_obs = 0;
  bool done = false;
  bool operator==(const Transition&) const = default;
};

// Fixed-capacity FIFO of transitions with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000);

  void push(const Transition& t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }

  // `n` distinct transitions (without replacement). Throws if fewer are stored.
  std::vector<Transition> sample(std::size_t n, Rng& rng) const;

  // Oldest first.
  std::vector<Transition> contents() const;

  nlohmann::json to_json() const;
  static ReplayBuffer from_json(const nlohmann::json& j);

 private:
  std::size_t capacity_;
  std::vector<Transition> data_;
  std::size_t next_ = 0;
};

}  // namespace mdtlab::deep
