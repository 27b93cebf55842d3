#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdtlab/analysis/stats.hpp"
#include "mdtlab/data/dataset.hpp"

namespace mdtlab::analysis {

// Regressors on choice optimality: uncertainty (low 0 / high 1), goal
// (flexible 0 / specific 1), previous stage-1 action (L 0 / R 1), previous
// stage-2 state index (standardized).
inline constexpr int kNumRegressors = 4;
inline constexpr std::array<const char*, kNumRegressors> kRegressorNames = {"uncertainty", "goal", "prev_action",
                                                                            "prev_state"};

struct GlmProfile {
  std::array<std::optional<double>, kNumRegressors> betas{};
  std::optional<double> intercept;
  std::optional<double> r2;
  int n = 0;
  double mean_y = 0.0;
  bool degenerate = false;          // y or some regressor had zero variance
  std::vector<std::string> flags;   // what was degenerate
};

struct GlmOptions {
  // Trials whose ideal stage-1 action is a tie have no optimal choice.
  bool exclude_ties = false;
};

GlmProfile glm_profile(const data::SubjectDataset& ds, const env::TaskGraph& graph, const GlmOptions& opt = {});

struct RegressorRecovery {
  std::string regressor;
  std::optional<Correlation> correlation;
  std::optional<double> slope;  // model beta on human beta
  int n = 0;
};

struct RecoveryResult {
  std::array<RegressorRecovery, kNumRegressors> per_regressor;
  // R^2 of model on human betas pooled over the uncertainty and goal effects.
  std::optional<double> summary_r2;
};

// Pairs profiles by position (subject); subjects missing a coefficient are
// dropped for that regressor.
RecoveryResult recovery_test(const std::vector<GlmProfile>& human, const std::vector<GlmProfile>& model);

// Mean of several profiles of the same source (e.g. repeated simulated
// sessions). Each coefficient averages the profiles where it is defined.
GlmProfile average_profiles(const std::vector<GlmProfile>& profiles);

// Permutation null for recovery: the model list is shuffled against the human
// list n_shuffles times; per regressor, the fraction of shuffles with p > alpha.
struct ShuffleControl {
  int n_shuffles = 0;
  std::array<double, kNumRegressors> frac_not_significant{};
};
ShuffleControl shuffled_recovery(const std::vector<GlmProfile>& human, const std::vector<GlmProfile>& model,
                                 int n_shuffles, std::uint64_t seed, double alpha = 0.05);

// Alternative pairing: mean optimality per (uncertainty x goal) condition bin
// of each subject, correlated across all (subject, bin) pairs.
std::optional<Correlation> recovery_by_condition_bins(const std::vector<data::SubjectDataset>& human,
                                                      const std::vector<data::SubjectDataset>& model,
                                                      const std::vector<env::TaskGraph>& graphs);

}  // namespace mdtlab::analysis
