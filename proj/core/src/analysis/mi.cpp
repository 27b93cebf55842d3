#include "mdtlab/analysis/mi.hpp"

#include <cmath>
#include <map>
#include <unordered_map>

#include "mdtlab/error.hpp"

namespace mdtlab::analysis {

namespace {

double entropy_of_counts(const std::map<long long, int>& counts, double n) {
  double h = 0.0;
  for (const auto& [k, c] : counts) {
    const double p = c / n;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

double plugin_entropy(const std::vector<int>& xs) {
  if (xs.empty()) return 0.0;
  std::map<long long, int> c;
  for (int x : xs) ++c[x];
  return entropy_of_counts(c, static_cast<double>(xs.size()));
}

double plugin_mi(const std::vector<int>& xs, const std::vector<int>& ys, bool miller_madow) {
  if (xs.size() != ys.size())
    throw ConfigError("plugin_mi: sequences differ in length (" + std::to_string(xs.size()) + " vs " +
                      std::to_string(ys.size()) + ")");
  if (xs.empty()) throw ConfigError("plugin_mi: empty sequences");
  const double n = static_cast<double>(xs.size());
  // Ordered maps keep the summation order independent of hashing.
  std::map<int, int> cx, cy;
  std::map<std::pair<int, int>, int> cxy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ++cx[xs[i]];
    ++cy[ys[i]];
    ++cxy[{xs[i], ys[i]}];
  }
  double mi = 0.0;
  for (const auto& [k, c] : cxy) {
    const double pxy = c / n;
    mi += pxy * std::log2(c * n / (static_cast<double>(cx[k.first]) * cy[k.second]));
  }
  if (miller_madow) {
    // Bias terms (K - 1) / 2n per entropy, in bits.
    const double kx = static_cast<double>(cx.size()), ky = static_cast<double>(cy.size());
    const double kxy = static_cast<double>(cxy.size());
    mi += ((kx - 1) + (ky - 1) - (kxy - 1)) / (2.0 * n * std::log(2.0));
  }
  return std::max(0.0, mi);
}

int episode_alphabet_size(const env::TaskGraph& graph) {
  return 2 * static_cast<int>(graph.terminals().size()) * 2 * 4;
}

int episode_symbol(const data::BehaviorRecord& prev, const env::TaskGraph& graph) {
  const int n_term = static_cast<int>(graph.terminals().size());
  const int term = graph.terminal_index(prev.s3);
  if (term < 0) throw ConfigError("episode_symbol: s3 is not a terminal state");
  const int r = env::token_index(prev.reward);
  if (r < 0) throw ConfigError("episode_symbol: reward is not a token value");
  const int a2 = env::index(prev.a2);
  const int a2_star = env::index(env::ideal_choice(graph, prev.p_transition, prev.goal, prev.s2).action);
  return ((a2 * n_term + term) * 2 + a2_star) * 4 + r;
}

MiReport episode_mi(const data::SubjectDataset& ds, const env::TaskGraph& graph, bool miller_madow) {
  if (ds.n_trials() < 2) throw ConfigError("episode_mi: need at least 2 trials");
  std::vector<int> f, a, a_star;
  for (std::size_t t = 1; t < ds.records.size(); ++t) {
    const auto& r = ds.records[t];
    f.push_back(episode_symbol(ds.records[t - 1], graph));
    a.push_back(env::index(r.a1));
    a_star.push_back(env::index(env::ideal_choice(graph, r.p_transition, r.goal, r.s1).action));
  }
  MiReport rep;
  rep.subject_id = ds.subject_id;
  rep.task_id = ds.task_id;
  rep.i_fa = plugin_mi(f, a, miller_madow);
  rep.i_aa = plugin_mi(a, a_star, miller_madow);
  rep.n_trials = static_cast<int>(f.size());
  return rep;
}

EfficacyResult encoding_efficacy(const std::vector<MiReport>& reports) {
  EfficacyResult e;
  e.n_subjects = static_cast<int>(reports.size());
  std::vector<double> ratios, x, y;
  for (const auto& r : reports) {
    x.push_back(r.i_fa);
    y.push_back(r.i_aa);
    if (r.i_aa > 0.0) ratios.push_back(r.i_fa / r.i_aa);
    else ++e.n_excluded;
  }
  e.n_ratio = static_cast<int>(ratios.size());
  if (!ratios.empty()) e.ratio_mean = mean(ratios);
  if (ratios.size() >= 2) e.ratio_sd = std::sqrt(variance(ratios));
  if (reports.size() >= 3) e.fit = simple_regression(x, y);
  return e;
}

}  // namespace mdtlab::analysis
