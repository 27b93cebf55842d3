#include "mdtlab/analysis/glm.hpp"

#include <algorithm>
#include <cmath>

#include "mdtlab/analysis/behavior.hpp"
#include "mdtlab/analysis/ols.hpp"
#include "mdtlab/error.hpp"
#include "mdtlab/rng.hpp"

namespace mdtlab::analysis {

GlmProfile glm_profile(const data::SubjectDataset& ds, const env::TaskGraph& graph, const GlmOptions& options) {
  const int T = ds.n_trials();
  if (T < 2) throw ConfigError("glm_profile: need at least 2 trials");
  const auto opt = choice_optimality(ds, graph);
  std::vector<int> rows;
  for (int t = 1; t < T; ++t)
    if (!(options.exclude_ties && opt.tie[t])) rows.push_back(t);
  const int n = static_cast<int>(rows.size());
  GlmProfile p;
  p.n = n;
  if (n < kNumRegressors + 2) {
    p.degenerate = true;
    p.flags.emplace_back("too few usable trials");
    return p;
  }
  Eigen::MatrixXd X(n, kNumRegressors);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const int t = rows[i];
    const auto& r = ds.records[t];
    const auto& prev = ds.records[t - 1];
    y(i) = opt.per_trial[t];
    X(i, 0) = r.uncertainty == env::Uncertainty::kHigh ? 1.0 : 0.0;
    X(i, 1) = env::is_specific(r.goal) ? 1.0 : 0.0;
    X(i, 2) = env::index(prev.a1);
    X(i, 3) = prev.s2;
  }
  p.mean_y = y.mean();
  const double sd3 = std::sqrt((X.col(3).array() - X.col(3).mean()).square().sum() / std::max(1, n - 1));
  if (sd3 > 0.0) X.col(3) = (X.col(3).array() - X.col(3).mean()) / sd3;

  if ((y.array() - y.mean()).abs().maxCoeff() == 0.0) {
    p.degenerate = true;
    p.flags.emplace_back("zero variance in choice optimality");
    return p;
  }
  std::vector<int> keep;
  std::vector<std::string> names;
  for (int c = 0; c < kNumRegressors; ++c) {
    if ((X.col(c).array() - X.col(c).mean()).abs().maxCoeff() == 0.0) {
      p.degenerate = true;
      p.flags.push_back(std::string("zero variance in ") + kRegressorNames[c]);
    } else {
      keep.push_back(c);
      names.emplace_back(kRegressorNames[c]);
    }
  }
  Eigen::MatrixXd Xk(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) Xk.col(static_cast<Eigen::Index>(i)) = X.col(keep[i]);
  try {
    const auto fit = ols_fit(Xk, y, names);
    for (std::size_t i = 0; i < keep.size(); ++i) p.betas[keep[i]] = fit.betas(static_cast<Eigen::Index>(i));
    p.intercept = fit.intercept;
    p.r2 = fit.r2;
  } catch (const NumericError& e) {
    p.degenerate = true;
    p.flags.emplace_back(e.what());
  }
  return p;
}

RecoveryResult recovery_test(const std::vector<GlmProfile>& human, const std::vector<GlmProfile>& model) {
  if (human.size() != model.size())
    throw ConfigError("recovery_test: " + std::to_string(human.size()) + " human profiles vs " +
                      std::to_string(model.size()) + " model profiles");
  RecoveryResult res;
  std::vector<double> pooled_h, pooled_m;
  for (int c = 0; c < kNumRegressors; ++c) {
    auto& rr = res.per_regressor[c];
    rr.regressor = kRegressorNames[c];
    std::vector<double> h, m;
    for (std::size_t i = 0; i < human.size(); ++i) {
      if (human[i].betas[c] && model[i].betas[c]) {
        h.push_back(*human[i].betas[c]);
        m.push_back(*model[i].betas[c]);
      }
    }
    rr.n = static_cast<int>(h.size());
    rr.correlation = pearson(h, m);
    if (auto f = simple_regression(h, m)) rr.slope = f->slope;
    if (c < 2) {
      pooled_h.insert(pooled_h.end(), h.begin(), h.end());
      pooled_m.insert(pooled_m.end(), m.begin(), m.end());
    }
  }
  if (auto f = simple_regression(pooled_h, pooled_m)) res.summary_r2 = f->r2;
  return res;
}

GlmProfile average_profiles(const std::vector<GlmProfile>& profiles) {
  if (profiles.empty()) throw ConfigError("average_profiles: no profiles");
  GlmProfile out;
  auto avg = [&](auto get) -> std::optional<double> {
    double sum = 0.0;
    int n = 0;
    for (const auto& p : profiles)
      if (auto v = get(p)) sum += *v, ++n;
    if (n == 0) return std::nullopt;
    return sum / n;
  };
  for (int c = 0; c < kNumRegressors; ++c) out.betas[c] = avg([c](const GlmProfile& p) { return p.betas[c]; });
  out.intercept = avg([](const GlmProfile& p) { return p.intercept; });
  out.r2 = avg([](const GlmProfile& p) { return p.r2; });
  out.degenerate = true;
  double my = 0.0;
  for (const auto& p : profiles) {
    out.n += p.n;
    my += p.mean_y;
    out.degenerate = out.degenerate && p.degenerate;
    for (const auto& f : p.flags)
      if (std::find(out.flags.begin(), out.flags.end(), f) == out.flags.end()) out.flags.push_back(f);
  }
  out.mean_y = my / profiles.size();
  return out;
}

ShuffleControl shuffled_recovery(const std::vector<GlmProfile>& human, const std::vector<GlmProfile>& model,
                                 int n_shuffles, std::uint64_t seed, double alpha) {
  if (n_shuffles <= 0) throw ConfigError("shuffled_recovery: n_shuffles must be positive");
  ShuffleControl out;
  out.n_shuffles = n_shuffles;
  Rng rng(seed);
  std::vector<GlmProfile> perm = model;
  for (int s = 0; s < n_shuffles; ++s) {
    // Fisher-Yates with the library stream so results do not depend on the STL.
    for (std::size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    const auto res = recovery_test(human, perm);
    for (int c = 0; c < kNumRegressors; ++c) {
      const auto& corr = res.per_regressor[c].correlation;
      if (!corr || corr->p > alpha) out.frac_not_significant[c] += 1.0;
    }
  }
  for (auto& f : out.frac_not_significant) f /= n_shuffles;
  return out;
}

std::optional<Correlation> recovery_by_condition_bins(const std::vector<data::SubjectDataset>& human,
                                                      const std::vector<data::SubjectDataset>& model,
                                                      const std::vector<env::TaskGraph>& graphs) {
  if (human.size() != model.size() || human.size() != graphs.size())
    throw ConfigError("recovery_by_condition_bins: inputs differ in length");
  auto bins = [](const data::SubjectDataset& ds, const env::TaskGraph& g) {
    const auto opt = choice_optimality(ds, g);
    std::array<double, 4> sum{}, cnt{};
    for (std::size_t t = 0; t < ds.records.size(); ++t) {
      const int b = (ds.records[t].uncertainty == env::Uncertainty::kHigh ? 2 : 0) +
                    (env::is_specific(ds.records[t].goal) ? 1 : 0);
      sum[b] += opt.per_trial[t];
      cnt[b] += 1.0;
    }
    std::array<std::optional<double>, 4> out{};
    for (int b = 0; b < 4; ++b)
      if (cnt[b] > 0) out[b] = sum[b] / cnt[b];
    return out;
  };
  std::vector<double> h, m;
  for (std::size_t i = 0; i < human.size(); ++i) {
    const auto bh = bins(human[i], graphs[i]);
    const auto bm = bins(model[i], graphs[i]);
    for (int b = 0; b < 4; ++b)
      if (bh[b] && bm[b]) h.push_back(*bh[b]), m.push_back(*bm[b]);
  }
  return pearson(h, m);
}

}  // namespace mdtlab::analysis
