#pragma once

#include <vector>

#include "mdtlab/rl/observation.hpp"

namespace mdtlab::rl {

// Action values keyed by (observation index, action). Entries never written
// read as 0.
class QTable {
 public:
  QTable() = default;
  explicit QTable(int n_obs) : values_(static_cast<std::size_t>(n_obs) * 2, 0.0) {}

  double get(int obs, Action a) const {
    const auto i = slot(obs, a);
    return i < values_.size() ? values_[i] : 0.0;
  }
  void set(int obs, Action a, double v);
  ActionValues values(int obs) const { return {get(obs, Action::kLeft), get(obs, Action::kRight)}; }

  const std::vector<double>& raw() const { return values_; }
  std::vector<double>& raw() { return values_; }

  bool operator==(const QTable&) const = default;

 private:
  static std::size_t slot(int obs, Action a) {
    return static_cast<std::size_t>(obs) * 2 + static_cast<std::size_t>(env::index(a));
  }
  std::vector<double> values_;
};

// delta = r + gamma * Q(s', a') - Q(s, a); Q(s, a) += alpha * delta. Returns delta.
double sarsa_update(QTable& q, int obs, Action a, double reward, int next_obs, Action next_a,
                    double alpha, double gamma);

// Terminal variant: the successor value is 0.
double sarsa_update_terminal(QTable& q, int obs, Action a, double reward, double alpha);

}  // namespace mdtlab::rl
