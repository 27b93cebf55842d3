#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mdtlab/arbitration/arbitrator.hpp"
#include "mdtlab/arbitration/reliability.hpp"
#include "mdtlab/rl/agent.hpp"
#include "mdtlab/rl/q_table.hpp"
#include "mdtlab/rl/transition_model.hpp"

namespace mdtlab::arbitration {

enum class PfcVariant { kThreshold, kMixture };

// Free parameters of the prefrontal arbitration agent. These are what policy
// matching fits and what freezing locks.
struct PfcParams {
  double mf_learning_rate = 0.1;  // SARSA alpha
  double mb_learning_rate = 0.2;  // FORWARD eta
  double spe_threshold = 0.1;
  double rpe_threshold = 4.0;     // 0.1 x max token value
  double inv_temp = 0.2;
  ArbitrationParams arbitration;
  double forgetting = 0.9;
  double prior_count = 1.0;
  double initial_w = 0.5;
  int mixture_window = 50;
  int mixture_truncation = 10;
  double mixture_concentration = 1.0;

  nlohmann::json to_json() const;
  static PfcParams from_json(const nlohmann::json& j);
  void validate() const;
  bool operator==(const PfcParams&) const = default;
};

// Names and order of the parameters exposed to likelihood fitting.
const std::vector<std::string>& pfc_fit_parameter_names();
std::vector<double> pfc_fit_vector(const PfcParams& p);
PfcParams pfc_from_fit_vector(const PfcParams& base, const std::vector<double>& v);

struct ArbitrationTraceRow {
  int trial = 0;
  double rel_mb = 0.0;
  double rel_mf = 0.0;
  double w = 0.0;
  double rpe = 0.0;
  double spe = 0.0;
};

// Prefrontal RL agent: SARSA (model-free) and FORWARD (model-based) learners
// whose prediction errors feed reliability estimators; the arbitration weight
// mixes the two value estimates before softmax choice. kThreshold is pfcRL1,
// kMixture (both PE channels through the DP mixture) is pfcRL2.
class PfcAgent final : public rl::Agent {
 public:
  explicit PfcAgent(PfcVariant variant = PfcVariant::kThreshold, PfcParams params = {},
                    int n_states = 9);

  std::string kind() const override { return variant_ == PfcVariant::kThreshold ? "pfc1" : "pfc2"; }
  void begin_task(const env::TaskGraph& graph) override;
  std::unique_ptr<rl::Agent> clone() const override { return std::make_unique<PfcAgent>(*this); }
  void reset_episode() override { reset_state(); }
  rl::ActionDist act(const rl::Observation& obs) override;
  void observe(const rl::Experience& e) override;
  nlohmann::json checkpoint() const override;
  void restore(const nlohmann::json& j) override;
  std::uint64_t learnable_hash() const override;

  const PfcParams& params() const { return params_; }
  void set_params(const PfcParams& p);
  PfcVariant variant() const { return variant_; }

  // Resets every piece of within-session state (values, model, reliabilities,
  // arbitration weight) to its initial value.
  void reset_state();

  const ArbitrationState& arbitration() const { return arb_; }
  const rl::QTable& q_mf() const { return q_; }
  const rl::TransitionModel& model() const { return model_; }
  rl::ActionValues q_mb(const rl::Observation& obs) const;

  void enable_trace(bool on) { tracing_ = on; }
  const std::vector<ArbitrationTraceRow>& trace() const { return trace_; }

 private:
  double update_mb_reliability(double spe);
  double update_mf_reliability(double rpe);

  PfcVariant variant_;
  PfcParams params_;
  int n_states_;
  env::TaskGraph graph_;
  rl::QTable q_;
  rl::TransitionModel model_;
  ThresholdReliability mb_threshold_, mf_threshold_;
  MixtureReliability mb_mixture_, mf_mixture_;
  ArbitrationState arb_;
  std::optional<rl::Experience> pending_;
  double last_rpe_ = 0.0;
  double last_spe_ = 0.0;
  int trial_ = 0;
  bool tracing_ = false;
  std::vector<ArbitrationTraceRow> trace_;
};

// Trace rows as CSV (trial,rel_mb,rel_mf,w,rpe,spe).
std::string trace_csv(const std::vector<ArbitrationTraceRow>& rows);

}  // namespace mdtlab::arbitration
