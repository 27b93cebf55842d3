#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdtlab/data/generator.hpp"
#include "mdtlab/training/session.hpp"
#include "mdtlab/training/trainer.hpp"

namespace mdtlab::experiment {

// Model identifiers of the battery. "random" is the untrained control.
inline constexpr std::string_view kRandom = "random";
const std::vector<std::string>& model_roster();

struct ModelId {
  std::string id;
  bool trained = false;  // false only for the random control
  training::Regime regime = training::Regime::kPM;
  std::string family;    // ddqn | meta | pfc1 | pfc2 | random
};
// Throws ConfigError for names outside the roster.
ModelId parse_model_id(std::string_view id);

// Factors applied by --desk-scale. Counts are rounded and never drop below
// the listed floors.
struct DeskScale {
  double subjects = 0.1;  // 82 -> 8
  double epochs = 0.02;   // 1000 -> 20
  double games = 0.5;     // [200, 400] -> [100, 200]
  double trials = 0.5;    // battery sessions 400 -> 200
  nlohmann::json to_json() const;
  static DeskScale from_json(const nlohmann::json& j);
};

// Per-stage seeds, all derived from the master seed when a manifest is
// created and then stored verbatim.
struct StageSeeds {
  std::uint64_t corpus = 0;
  std::uint64_t train = 0;
  std::uint64_t eval = 0;
  std::uint64_t order = 0;
};

struct ExperimentManifest {
  std::string name = "mdtlab";
  std::uint64_t master_seed = 1;
  StageSeeds seeds;
  data::SubjectGeneratorConfig corpus;
  // Directory of external subject CSV files; when set, gen imports it instead
  // of generating a synthetic corpus.
  std::string data_dir;
  std::vector<std::string> models = model_roster();
  std::vector<std::string> tasks;       // task ids, default the canonical suite
  std::vector<std::string> task_order;  // seeded permutation of `tasks`
  training::TrainingConfig training;    // base config, regime and seed set per cell
  int eval_trials = 400;
  int recovery_sessions = 5;            // simulated sessions averaged per model profile
  training::FreezeMode freeze_mode = training::FreezeMode::kWeightsOnly;
  bool early_stop_from_pfc = true;      // PM-DDQN stops at the fitted pfcRL1 likelihood
  std::string out_dir = "mdtlab-out";
  int jobs = 1;
  bool desk_scale = false;
  DeskScale desk;

  // Default manifest: seeds and task order filled in from master_seed.
  static ExperimentManifest make(std::uint64_t master_seed = 1);
  void validate() const;
  // Copy with the desk factors applied (identity when desk_scale is false).
  ExperimentManifest effective() const;

  nlohmann::json to_json() const;
  static ExperimentManifest from_json(const nlohmann::json& j);
  static ExperimentManifest load(const std::string& path);
  void save(const std::string& path) const;
};

// Scheduling-independent seed of one (subject, model, task, stage) cell.
std::uint64_t cell_seed(std::uint64_t master, std::string_view subject, std::string_view model,
                        std::string_view task, std::string_view stage);

}  // namespace mdtlab::experiment
