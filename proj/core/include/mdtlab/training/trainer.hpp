#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdtlab/arbitration/pfc_agent.hpp"
#include "mdtlab/data/dataset.hpp"
#include "mdtlab/env/task.hpp"
#include "mdtlab/rl/agent.hpp"

namespace mdtlab::training {

enum class Regime { kGM, kPM };
std::string_view to_string(Regime r);
Regime parse_regime(std::string_view s);

// How R_Omega reaches the stage-1 decision of a teacher-forced game.
// kGameReturn: both decisions of the game are credited with R_Omega as a
// one-step return. kBootstrap: stage 1 bootstraps from stage 2 (which, under
// teacher forcing, carries no information about the stage-1 choice).
enum class PmCredit { kGameReturn, kBootstrap };
std::string_view to_string(PmCredit c);
PmCredit parse_pm_credit(std::string_view s);

struct TrainingConfig {
  Regime regime = Regime::kPM;
  int epochs = 1000;
  int games_min = 200;
  int games_max = 400;
  double pm_k = 10.0;
  double pm_n = 10.0;
  PmCredit pm_credit = PmCredit::kGameReturn;
  // Stop once the epoch's likelihood sum exceeds this reference.
  std::optional<double> early_stop;
  double holdout_fraction = 0.2;
  int eval_every = 1;
  // Fraction of the planned environment steps over which DDQN epsilon anneals.
  double epsilon_anneal_fraction = 0.2;
  // Prefrontal agents: coordinate descent on the likelihood.
  int fit_restarts = 3;
  int fit_sweeps = 3;
  int fit_line_evals = 12;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainingConfig from_json(const nlohmann::json& j);
};

// Missing measurements are NaN.
struct CurveRow {
  int epoch = 0;
  double loss = std::numeric_limits<double>::quiet_NaN();
  double mean_reward = std::numeric_limits<double>::quiet_NaN();
  double mean_likelihood = std::numeric_limits<double>::quiet_NaN();
};

std::string curve_csv(const std::vector<CurveRow>& rows);
std::vector<CurveRow> parse_curve_csv(const std::string& text);

struct TrainedModel {
  std::string model_id;
  std::unique_ptr<rl::Agent> agent;
  std::vector<CurveRow> curve;
  TrainingConfig config;
  nlohmann::json info = nlohmann::json::object();
  bool frozen = true;

  TrainedModel clone() const;
  // Bundle directory: checkpoint.json, config.json, curve.csv, manifest.json.
  void save(const std::string& dir) const;
  static TrainedModel load(const std::string& dir);
};

std::unique_ptr<rl::Agent> agent_from_checkpoint(const nlohmann::json& j);

// Terminal reward: k + n if both actions match, k - n if both differ, k otherwise.
double pm_terminal_reward(env::Action agent1, env::Action agent2, env::Action human1, env::Action human2,
                          double k, double n);

// Free interaction on `task`; each epoch is one session of games drawn from
// [games_min, games_max] with a fresh environment seed.
TrainedModel train_gm(std::unique_ptr<rl::Agent> agent, const env::TaskSpec& task, const TrainingConfig& cfg,
                      std::string model_id = "");

// Policy matching against one subject. Prefrontal agents are fitted by
// likelihood; learning agents act along the subject's states and learn from
// R_Omega.
TrainedModel train_pm(std::unique_ptr<rl::Agent> agent, const data::SubjectDataset& subject,
                      const env::TaskSpec& task, const TrainingConfig& cfg, std::string model_id = "");

struct PfcFitResult {
  arbitration::PfcParams params;
  double log_likelihood = 0.0;
  double likelihood_sum = 0.0;
  int evaluations = 0;
  std::vector<CurveRow> curve;
};

// Search box for each fitted parameter (lo, hi); the search runs in log space.
struct FitBounds {
  double lo, hi;
};
const std::vector<FitBounds>& pfc_fit_bounds();

PfcFitResult fit_pfc(const arbitration::PfcAgent& agent, const data::SubjectDataset& subject,
                     const env::TaskGraph& graph, const TrainingConfig& cfg);

}  // namespace mdtlab::training
