#include "mdtlab/arbitration/pfc_agent.hpp"

#include <sstream>

#include "mdtlab/error.hpp"
#include "mdtlab/rl/policy.hpp"

namespace mdtlab::arbitration {

using nlohmann::json;

json PfcParams::to_json() const {
  return {{"mf_learning_rate", mf_learning_rate},
          {"mb_learning_rate", mb_learning_rate},
          {"spe_threshold", spe_threshold},
          {"rpe_threshold", rpe_threshold},
          {"inv_temp", inv_temp},
          {"a_alpha", arbitration.a_alpha},
          {"a_beta", arbitration.a_beta},
          {"b_alpha", arbitration.b_alpha},
          {"b_beta", arbitration.b_beta},
          {"forgetting", forgetting},
          {"prior_count", prior_count},
          {"initial_w", initial_w},
          {"mixture_window", mixture_window},
          {"mixture_truncation", mixture_truncation},
          {"mixture_concentration", mixture_concentration}};
}

PfcParams PfcParams::from_json(const json& j) {
  PfcParams p;
  p.mf_learning_rate = j.value("mf_learning_rate", p.mf_learning_rate);
  p.mb_learning_rate = j.value("mb_learning_rate", p.mb_learning_rate);
  p.spe_threshold = j.value("spe_threshold", p.spe_threshold);
  p.rpe_threshold = j.value("rpe_threshold", p.rpe_threshold);
  p.inv_temp = j.value("inv_temp", p.inv_temp);
  p.arbitration.a_alpha = j.value("a_alpha", p.arbitration.a_alpha);
  p.arbitration.a_beta = j.value("a_beta", p.arbitration.a_beta);
  p.arbitration.b_alpha = j.value("b_alpha", p.arbitration.b_alpha);
  p.arbitration.b_beta = j.value("b_beta", p.arbitration.b_beta);
  p.forgetting = j.value("forgetting", p.forgetting);
  p.prior_count = j.value("prior_count", p.prior_count);
  p.initial_w = j.value("initial_w", p.initial_w);
  p.mixture_window = j.value("mixture_window", p.mixture_window);
  p.mixture_truncation = j.value("mixture_truncation", p.mixture_truncation);
  p.mixture_concentration = j.value("mixture_concentration", p.mixture_concentration);
  p.validate();
  return p;
}

void PfcParams::validate() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must be in [0,1]");
  };
  unit(mf_learning_rate, "mf_learning_rate");
  unit(mb_learning_rate, "mb_learning_rate");
  unit(initial_w, "initial_w");
  unit(arbitration.a_alpha, "a_alpha");
  unit(arbitration.a_beta, "a_beta");
  if (!(spe_threshold > 0) || !(rpe_threshold > 0)) throw ConfigError("PE thresholds must be > 0");
  if (!(inv_temp >= 0)) throw ConfigError("inv_temp must be >= 0");
}

const std::vector<std::string>& pfc_fit_parameter_names() {
  static const std::vector<std::string> names = {
      "mf_learning_rate", "mb_learning_rate", "inv_temp",      "a_alpha",      "a_beta",
      "b_alpha",          "b_beta",           "spe_threshold", "rpe_threshold"};
  return names;
}

std::vector<double> pfc_fit_vector(const PfcParams& p) {
  return {p.mf_learning_rate,     p.mb_learning_rate,     p.inv_temp,
          p.arbitration.a_alpha,  p.arbitration.a_beta,   p.arbitration.b_alpha,
          p.arbitration.b_beta,   p.spe_threshold,        p.rpe_threshold};
}

PfcParams pfc_from_fit_vector(const PfcParams& base, const std::vector<double>& v) {
  if (v.size() != pfc_fit_parameter_names().size())
    throw ConfigError("pfc parameter vector has wrong length");
  PfcParams p = base;
  p.mf_learning_rate = v[0];
  p.mb_learning_rate = v[1];
  p.inv_temp = v[2];
  p.arbitration.a_alpha = v[3];
  p.arbitration.a_beta = v[4];
  p.arbitration.b_alpha = v[5];
  p.arbitration.b_beta = v[6];
  p.spe_threshold = v[7];
  p.rpe_threshold = v[8];
  return p;
}

namespace {

MixtureOptions mixture_options(const PfcParams& p, double scale) {
  return {scale, p.mixture_window, p.mixture_truncation, p.mixture_concentration};
}

}  // namespace

PfcAgent::PfcAgent(PfcVariant variant, PfcParams params, int n_states)
    : variant_(variant),
      params_(params),
      n_states_(n_states),
      mb_threshold_(params.spe_threshold, params.forgetting, params.prior_count),
      mf_threshold_(params.rpe_threshold, params.forgetting, params.prior_count),
      mb_mixture_(mixture_options(params, params.spe_threshold)),
      mf_mixture_(mixture_options(params, params.rpe_threshold)) {
  params_.validate();
  reset_state();
}

void PfcAgent::set_params(const PfcParams& p) {
  require_unfrozen("PfcAgent::set_params");
  p.validate();
  params_ = p;
  reset_state();
}

void PfcAgent::reset_state() {
  q_ = rl::QTable(rl::n_observations(n_states_));
  model_ = graph_.n_states() > 0 ? rl::TransitionModel(graph_, params_.mb_learning_rate)
                                 : rl::TransitionModel();
  model_.set_learning_rate(params_.mb_learning_rate);
  mb_threshold_ = ThresholdReliability(params_.spe_threshold, params_.forgetting, params_.prior_count);
  mf_threshold_ = ThresholdReliability(params_.rpe_threshold, params_.forgetting, params_.prior_count);
  mb_mixture_ = MixtureReliability(mixture_options(params_, params_.spe_threshold));
  mf_mixture_ = MixtureReliability(mixture_options(params_, params_.rpe_threshold));
  arb_ = ArbitrationState{};
  arb_.params = params_.arbitration;
  arb_.p_mb = params_.initial_w;
  arb_.rel_mb = variant_ == PfcVariant::kThreshold ? mb_threshold_.reliability() : mb_mixture_.reliability();
  arb_.rel_mf = variant_ == PfcVariant::kThreshold ? mf_threshold_.reliability() : mf_mixture_.reliability();
  pending_.reset();
  trial_ = 0;
  trace_.clear();
}

void PfcAgent::begin_task(const env::TaskGraph& graph) {
  graph_ = graph;
  model_.adapt(graph_);
  pending_.reset();
}

rl::ActionValues PfcAgent::q_mb(const rl::Observation& obs) const {
  const auto all = rl::mb_values(model_, graph_, obs.goal);
  return obs.state < static_cast<int>(all.size()) ? all[obs.state] : rl::ActionValues{0.0, 0.0};
}

rl::ActionDist PfcAgent::act(const rl::Observation& obs) {
  const auto q = combine_q(arb_.p_mb, q_mb(obs), q_.values(obs.index()));
  return rl::softmax_policy(q, params_.inv_temp);
}

double PfcAgent::update_mb_reliability(double spe) {
  return variant_ == PfcVariant::kThreshold ? mb_threshold_.update(spe) : mb_mixture_.update(spe);
}

double PfcAgent::update_mf_reliability(double rpe) {
  return variant_ == PfcVariant::kThreshold ? mf_threshold_.update(rpe) : mf_mixture_.update(rpe);
}

void PfcAgent::observe(const rl::Experience& e) {
  double rel_mb = arb_.rel_mb;
  double rel_mf = arb_.rel_mf;
  if (pending_) {
    last_rpe_ = rl::sarsa_update(q_, pending_->obs.index(), pending_->action, pending_->reward,
                                 e.obs.index(), e.action, params_.mf_learning_rate, 1.0);
    rel_mf = update_mf_reliability(last_rpe_);
    pending_.reset();
  }
  last_spe_ = model_.update(e.obs.state, e.action, e.next_obs.state);
  rel_mb = update_mb_reliability(last_spe_);
  if (e.done) {
    last_rpe_ = rl::sarsa_update_terminal(q_, e.obs.index(), e.action, e.reward, params_.mf_learning_rate);
    rel_mf = update_mf_reliability(last_rpe_);
  } else {
    pending_ = e;
  }
  arb_ = arbitration_step(arb_, rel_mb, rel_mf);
  if (e.done) {
    if (tracing_) trace_.push_back({trial_, arb_.rel_mb, arb_.rel_mf, arb_.p_mb, last_rpe_, last_spe_});
    ++trial_;
  }
}

json PfcAgent::checkpoint() const {
  auto j = rl::checkpoint_header(kind());
  j["params"] = params_.to_json();
  j["n_states"] = n_states_;
  if (graph_.n_states() > 0) j["task_graph"] = graph_.to_json();
  const auto mb_c = mb_threshold_.counts();
  const auto mf_c = mf_threshold_.counts();
  std::vector<double> pending;
  if (pending_)
    pending = {static_cast<double>(pending_->obs.index()), static_cast<double>(env::index(pending_->action)),
               pending_->reward, static_cast<double>(pending_->next_obs.index())};
  j["arrays"] = {
      {"q", q_.raw()},
      {"transition_model", model_.to_flat()},
      {"mb_counts", std::vector<double>(mb_c.begin(), mb_c.end())},
      {"mf_counts", std::vector<double>(mf_c.begin(), mf_c.end())},
      {"mb_window", std::vector<double>(mb_mixture_.window().begin(), mb_mixture_.window().end())},
      {"mf_window", std::vector<double>(mf_mixture_.window().begin(), mf_mixture_.window().end())},
      {"arbitration", std::vector<double>{arb_.rel_mb, arb_.rel_mf, arb_.p_mb}},
      {"pending", pending},
      {"last_pe", std::vector<double>{last_rpe_, last_spe_, static_cast<double>(trial_)}}};
  return j;
}

void PfcAgent::restore(const json& j) {
  rl::check_checkpoint(j, kind());
  params_ = PfcParams::from_json(j.at("params"));
  n_states_ = j.value("n_states", n_states_);
  graph_ = j.contains("task_graph") ? env::TaskGraph::from_json(j["task_graph"]) : env::TaskGraph{};
  reset_state();
  const auto& a = j.at("arrays");
  q_.raw() = a.at("q").get<std::vector<double>>();
  model_ = rl::TransitionModel::from_flat(a.at("transition_model").get<std::vector<double>>(),
                                          params_.mb_learning_rate);
  auto counts = [](const json& v) {
    const auto c = v.get<std::vector<double>>();
    if (c.size() != 3) throw SchemaError("reliability counts must have 3 entries");
    return std::array<double, 3>{c[0], c[1], c[2]};
  };
  mb_threshold_.set_counts(counts(a.at("mb_counts")));
  mf_threshold_.set_counts(counts(a.at("mf_counts")));
  mb_mixture_.set_window(a.at("mb_window").get<std::vector<double>>());
  mf_mixture_.set_window(a.at("mf_window").get<std::vector<double>>());
  const auto arb = a.at("arbitration").get<std::vector<double>>();
  if (arb.size() != 3) throw SchemaError("arbitration array must have 3 entries");
  arb_.rel_mb = arb[0];
  arb_.rel_mf = arb[1];
  arb_.p_mb = arb[2];
  const auto pending = a.at("pending").get<std::vector<double>>();
  if (pending.size() == 4) {
    rl::Experience e;
    e.obs = rl::Observation::from_index(static_cast<int>(pending[0]));
    e.action = env::action_from_index(static_cast<int>(pending[1]));
    e.reward = pending[2];
    e.next_obs = rl::Observation::from_index(static_cast<int>(pending[3]));
    pending_ = e;
  }
  const auto last = a.at("last_pe").get<std::vector<double>>();
  if (last.size() == 3) {
    last_rpe_ = last[0];
    last_spe_ = last[1];
    trial_ = static_cast<int>(last[2]);
  }
}

std::uint64_t PfcAgent::learnable_hash() const {
  auto v = pfc_fit_vector(params_);
  v.push_back(params_.forgetting);
  v.push_back(params_.prior_count);
  v.push_back(params_.initial_w);
  return rl::hash_doubles(v, variant_ == PfcVariant::kThreshold ? 1 : 2);
}

std::string trace_csv(const std::vector<ArbitrationTraceRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "trial,rel_mb,rel_mf,w,rpe,spe\n";
  for (const auto& r : rows)
    os << r.trial << ',' << r.rel_mb << ',' << r.rel_mf << ',' << r.w << ',' << r.rpe << ',' << r.spe << '\n';
  return os.str();
}

}  // namespace mdtlab::arbitration
