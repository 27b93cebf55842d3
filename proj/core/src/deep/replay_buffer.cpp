#include "mdtlab/deep/replay_buffer.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "mdtlab/error.hpp"

namespace mdtlab::deep {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(const Transition& t) {
  if (data_.size() < capacity_) {
    data_.push_back(t);
  } else {
    data_[next_] = t;
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  const std::size_t m = data_.size();
  if (n > m)
    throw ProtocolError("replay buffer holds " + std::to_string(m) + " transitions, cannot sample " +
                        std::to_string(n));
  // Floyd's algorithm.
  std::unordered_set<std::size_t> chosen;
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t j = m - n; j < m; ++j) {
    auto t = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(j)));
    if (!chosen.insert(t).second) {
      chosen.insert(j);
      t = j;
    }
    out.push_back(data_[t]);
  }
  return out;
}

std::vector<Transition> ReplayBuffer::contents() const {
  if (data_.size() < capacity_) return data_;
  std::vector<Transition> out(data_.begin() + static_cast<std::ptrdiff_t>(next_), data_.end());
  out.insert(out.end(), data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(next_));
  return out;
}

nlohmann::json ReplayBuffer::to_json() const {
  std::vector<double> flat;
  flat.reserve(data_.size() * 5);
  for (const auto& t : contents()) {
    flat.insert(flat.end(), {double(t.obs), double(t.action), t.reward, double(t.next_obs),
                             t.done ? 1.0 : 0.0});
  }
  return {{"capacity", capacity_}, {"transitions", flat}};
}

ReplayBuffer ReplayBuffer::from_json(const nlohmann::json& j) {
  ReplayBuffer b(j.at("capacity").get<std::size_t>());
  const auto flat = j.at("transitions").get<std::vector<double>>();
  if (flat.size() % 5 != 0) throw SchemaError("replay buffer: transitions must come in groups of 5");
  for (std::size_t k = 0; k < flat.size(); k += 5)
    b.push({static_cast<int>(flat[k]), static_cast<int>(flat[k + 1]), flat[k + 2],
            static_cast<int>(flat[k + 3]), flat[k + 4] != 0.0});
  return b;
}

}  // namespace mdtlab::deep
