#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mdtlab/analysis/glm.hpp"
#include "mdtlab/data/dataset.hpp"
#include "mdtlab/env/task.hpp"
#include "mdtlab/experiment/manifest.hpp"
#include "mdtlab/rl/agent.hpp"

namespace mdtlab::experiment {

// Output directory layout.
struct Layout {
  std::string root;
  std::string manifest() const { return root + "/manifest.json"; }
  std::string corpus() const { return root + "/corpus"; }
  std::string corpus_index() const { return corpus() + "/index.json"; }
  std::string truth() const { return corpus() + "/truth.json"; }
  std::string models() const { return root + "/models"; }
  // GM bundles live under "shared"; PM bundles under the subject id.
  std::string bundle(const std::string& model, const std::string& owner) const {
    return models() + "/" + model + "/" + owner;
  }
  std::string battery() const { return root + "/battery"; }
  std::string evaluation(const std::string& task, const std::string& model, const std::string& subject) const {
    return battery() + "/" + task + "/" + model + "/" + subject + ".csv";
  }
  std::string reports() const { return root + "/reports"; }
  std::string figures() const { return root + "/figures"; }
};

inline constexpr const char* kSharedOwner = "shared";

struct CorpusEntry {
  data::SubjectDataset dataset;
  env::TaskSpec task;
};
std::vector<CorpusEntry> load_corpus(const Layout& layout);

// Untrained agent for a roster model.
std::unique_ptr<rl::Agent> make_agent(const ModelId& model, std::uint64_t seed, int n_states);

// Mean GLM profile of `sessions` frozen sessions of `agent` on `task`.
analysis::GlmProfile simulated_profile(const rl::Agent& agent, const env::TaskSpec& task, int sessions,
                                       std::uint64_t seed, training::FreezeMode mode);

struct GenSummary {
  int subjects = 0;
  std::string source;  // synthetic | external
};
GenSummary cmd_gen(const ExperimentManifest& manifest);

struct TrainSummary {
  int gm_bundles = 0;
  int pm_bundles = 0;
  int trained = 0;
  int resumed = 0;  // bundles already complete and left untouched
};
TrainSummary cmd_train(const ExperimentManifest& manifest, bool resume);

struct BatterySummary {
  int evaluations = 0;
  int skipped = 0;  // cells whose bundle was missing
};
BatterySummary cmd_battery(const ExperimentManifest& manifest);

struct ReportSummary {
  std::vector<std::string> files;
};
ReportSummary cmd_report(const std::string& out_dir);

// Paired test of model against random normalized rewards. FAIL unless the
// two-sided p is at most 0.05; an undefined test also fails.
bool fail_label(const std::optional<double>& p);

}  // namespace mdtlab::experiment
