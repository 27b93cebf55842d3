#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdtlab/analysis/stats.hpp"
#include "mdtlab/data/dataset.hpp"

namespace mdtlab::analysis {

// Plug-in entropy and mutual information in bits over integer symbols.
double plugin_entropy(const std::vector<int>& xs);
double plugin_mi(const std::vector<int>& xs, const std::vector<int>& ys, bool miller_madow = false);

// F_{t-1} = (a2, terminal, ideal a2, reward) of the previous trial as one
// symbol of the exact product alphabet 2 x |terminals| x 2 x 4.
int episode_symbol(const data::BehaviorRecord& prev, const env::TaskGraph& graph);
int episode_alphabet_size(const env::TaskGraph& graph);

struct MiReport {
  std::string subject_id;
  std::string task_id;
  std::string model_id;
  double i_fa = 0.0;  // I(F_{t-1}; a1_t)
  double i_aa = 0.0;  // I(a1_t; ideal a1_t)
  int n_trials = 0;   // pairs used
};

MiReport episode_mi(const data::SubjectDataset& ds, const env::TaskGraph& graph, bool miller_madow = false);

struct EfficacyResult {
  int n_subjects = 0;
  int n_ratio = 0;       // subjects with i_aa > 0
  int n_excluded = 0;    // subjects with i_aa = 0
  std::optional<double> ratio_mean;
  std::optional<double> ratio_sd;
  std::optional<SimpleFit> fit;  // i_aa regressed on i_fa
};

// Requires at least 3 reports for the regression; otherwise the fit is
// undefined.
EfficacyResult encoding_efficacy(const std::vector<MiReport>& reports);

}  // namespace mdtlab::analysis
