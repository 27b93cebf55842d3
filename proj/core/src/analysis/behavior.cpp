#include "mdtlab/analysis/behavior.hpp"

#include <cmath>
#include <map>

namespace mdtlab::analysis {

Optimality choice_optimality(const data::SubjectDataset& ds, const env::TaskGraph& graph, OptimalityStage stage) {
  Optimality o;
  o.per_trial.reserve(ds.records.size());
  o.tie.reserve(ds.records.size());
  double sum = 0.0;
  for (const auto& r : ds.records) {
    const bool first = stage == OptimalityStage::kStage1;
    const auto ideal = env::ideal_choice(graph, r.p_transition, r.goal, first ? r.s1 : r.s2);
    const int hit = (first ? r.a1 : r.a2) == ideal.action ? 1 : 0;
    o.per_trial.push_back(hit);
    o.tie.push_back(ideal.tie());
    sum += hit;
  }
  if (!o.per_trial.empty()) o.mean = sum / static_cast<double>(o.per_trial.size());
  return o;
}

std::optional<double> choice_consistency(const data::SubjectDataset& ds) {
  std::map<int, env::Action> last;
  int revisits = 0, repeats = 0;
  auto visit = [&](int state, env::Action a) {
    const auto it = last.find(state);
    if (it != last.end()) {
      ++revisits;
      repeats += it->second == a ? 1 : 0;
      it->second = a;
    } else {
      last.emplace(state, a);
    }
  };
  for (const auto& r : ds.records) {
    visit(r.s1, r.a1);
    visit(r.s2, r.a2);
  }
  if (revisits == 0) return std::nullopt;
  return static_cast<double>(repeats) / revisits;
}

std::vector<double> normalized_reward_per_trial(const data::SubjectDataset& ds, const env::TaskGraph& graph) {
  std::vector<double> out;
  out.reserve(ds.records.size());
  for (const auto& r : ds.records) {
    const double denom = env::ideal_root_value(graph, r.p_transition, r.goal);
    out.push_back(denom > 0.0 ? r.reward / denom : std::nan(""));
  }
  return out;
}

std::optional<double> normalized_reward(const data::SubjectDataset& ds, const env::TaskGraph& graph,
                                        RewardFilter filter) {
  const auto per = normalized_reward_per_trial(ds, graph);
  double sum = 0.0;
  int n = 0;
  for (std::size_t t = 0; t < per.size(); ++t) {
    if (std::isnan(per[t])) continue;
    if (filter == RewardFilter::kActionChanged && (t == 0 || ds.records[t].a1 == ds.records[t - 1].a1)) continue;
    sum += per[t];
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace mdtlab::analysis
