#include "mdtlab/training/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mdtlab/deep/ddqn_agent.hpp"
#include "mdtlab/deep/meta_agent.hpp"
#include "mdtlab/env/environment.hpp"
#include "mdtlab/error.hpp"
#include "mdtlab/rl/basic_agents.hpp"
#include "mdtlab/rl/policy.hpp"
#include "mdtlab/training/likelihood.hpp"

namespace mdtlab::training {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Regime r) { return r == Regime::kGM ? "GM" : "PM"; }

Regime parse_regime(std::string_view s) {
  if (s == "GM") return Regime::kGM;
  if (s == "PM") return Regime::kPM;
  throw ConfigError("unknown regime '" + std::string(s) + "'");
}

std::string_view to_string(PmCredit c) { return c == PmCredit::kGameReturn ? "game_return" : "bootstrap"; }

PmCredit parse_pm_credit(std::string_view s) {
  if (s == "game_return") return PmCredit::kGameReturn;
  if (s == "bootstrap") return PmCredit::kBootstrap;
  throw ConfigError("unknown pm_credit '" + std::string(s) + "'");
}

void TrainingConfig::validate() const {
  if (epochs < 0) throw ConfigError("training: epochs must be non-negative");
  if (games_min <= 0 || games_max < games_min) throw ConfigError("training: need 0 < games_min <= games_max");
  if (!(pm_k > 0.0)) throw ConfigError("training: pm_k must be positive");
  if (!(pm_n >= 0.0)) throw ConfigError("training: pm_n must be non-negative");
  if (!(holdout_fraction > 0.0 && holdout_fraction <= 1.0))
    throw ConfigError("training: holdout_fraction must lie in (0, 1]");
  if (eval_every <= 0) throw ConfigError("training: eval_every must be positive");
  if (!(epsilon_anneal_fraction >= 0.0 && epsilon_anneal_fraction <= 1.0))
    throw ConfigError("training: epsilon_anneal_fraction must lie in [0, 1]");
  if (fit_restarts <= 0 || fit_sweeps <= 0 || fit_line_evals < 3)
    throw ConfigError("training: fit_restarts, fit_sweeps must be positive and fit_line_evals >= 3");
}

json TrainingConfig::to_json() const {
  json j = {{"regime", to_string(regime)},
            {"epochs", epochs},
            {"games_min", games_min},
            {"games_max", games_max},
            {"pm_k", pm_k},
            {"pm_n", pm_n},
            {"pm_credit", to_string(pm_credit)},
            {"early_stop", nullptr},
            {"holdout_fraction", holdout_fraction},
            {"eval_every", eval_every},
            {"epsilon_anneal_fraction", epsilon_anneal_fraction},
            {"fit_restarts", fit_restarts},
            {"fit_sweeps", fit_sweeps},
            {"fit_line_evals", fit_line_evals},
            {"seed", seed}};
  if (early_stop) j["early_stop"] = *early_stop;
  return j;
}

TrainingConfig TrainingConfig::from_json(const json& j) {
  TrainingConfig c;
  c.regime = parse_regime(j.value("regime", std::string(to_string(c.regime))));
  c.epochs = j.value("epochs", c.epochs);
  c.games_min = j.value("games_min", c.games_min);
  c.games_max = j.value("games_max", c.games_max);
  c.pm_k = j.value("pm_k", c.pm_k);
  c.pm_n = j.value("pm_n", c.pm_n);
  c.pm_credit = parse_pm_credit(j.value("pm_credit", std::string(to_string(c.pm_credit))));
  if (j.contains("early_stop") && !j.at("early_stop").is_null()) c.early_stop = j.at("early_stop").get<double>();
  c.holdout_fraction = j.value("holdout_fraction", c.holdout_fraction);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.epsilon_anneal_fraction = j.value("epsilon_anneal_fraction", c.epsilon_anneal_fraction);
  c.fit_restarts = j.value("fit_restarts", c.fit_restarts);
  c.fit_sweeps = j.value("fit_sweeps", c.fit_sweeps);
  c.fit_line_evals = j.value("fit_line_evals", c.fit_line_evals);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_or_nan(const std::string& s) { return s.empty() ? std::nan("") : std::stod(s); }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + p.string() + "'");
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string curve_csv(const std::vector<CurveRow>& rows) {
  std::string out = "epoch,loss,mean_reward,mean_likelihood\n";
  for (const auto& r : rows)
    out += std::to_string(r.epoch) + ',' + fmt(r.loss) + ',' + fmt(r.mean_reward) + ',' + fmt(r.mean_likelihood) +
           '\n';
  return out;
}

std::vector<CurveRow> parse_curve_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "epoch,loss,mean_reward,mean_likelihood")
    throw SchemaError("curve: bad header");
  std::vector<CurveRow> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    while (f.size() < 4) f.emplace_back();
    if (f.size() != 4) throw SchemaError("curve: expected 4 fields", row);
    try {
      rows.push_back({std::stoi(f[0]), parse_or_nan(f[1]), parse_or_nan(f[2]), parse_or_nan(f[3])});
    } catch (const std::exception&) {
      throw SchemaError("curve: bad number", row);
    }
  }
  return rows;
}

std::unique_ptr<rl::Agent> agent_from_checkpoint(const json& j) {
  const std::string kind = j.value("kind", "");
  std::unique_ptr<rl::Agent> a;
  if (kind == "random") a = std::make_unique<rl::RandomAgent>();
  else if (kind == "sarsa") a = std::make_unique<rl::SarsaAgent>();
  else if (kind == "pfc1") a = std::make_unique<arbitration::PfcAgent>(arbitration::PfcVariant::kThreshold);
  else if (kind == "pfc2") a = std::make_unique<arbitration::PfcAgent>(arbitration::PfcVariant::kMixture);
  else if (kind == "ddqn") a = std::make_unique<deep::DdqnAgent>(deep::DdqnConfig::from_json(j.at("params")));
  else if (kind == "meta") a = std::make_unique<deep::MetaAgent>(deep::MetaConfig::from_json(j.at("params")));
  else throw SchemaError("checkpoint: unknown agent kind '" + kind + "'");
  a->restore(j);
  return a;
}

TrainedModel TrainedModel::clone() const {
  TrainedModel m;
  m.model_id = model_id;
  m.agent = agent ? agent->clone() : nullptr;
  m.curve = curve;
  m.config = config;
  m.info = info;
  m.frozen = frozen;
  return m;
}

void TrainedModel::save(const std::string& dir) const {
  if (!agent) throw ProtocolError("trained model has no agent");
  fs::create_directories(dir);
  const std::string checkpoint = agent->checkpoint().dump();
  const std::string config_text = json{{"model_id", model_id}, {"training", config.to_json()}, {"info", info}}.dump(2);
  const std::string curve_text = curve_csv(curve);
  write_file(fs::path(dir) / "checkpoint.json", checkpoint);
  write_file(fs::path(dir) / "config.json", config_text);
  write_file(fs::path(dir) / "curve.csv", curve_text);
  const json manifest = {{"model_id", model_id},
                         {"kind", agent->kind()},
                         {"frozen", frozen},
                         {"files",
                          {{"checkpoint.json", hex(fnv1a64(checkpoint))},
                           {"config.json", hex(fnv1a64(config_text))},
                           {"curve.csv", hex(fnv1a64(curve_text))}}}};
  // Written last: its presence marks a complete bundle.
  write_file(fs::path(dir) / "manifest.json", manifest.dump(2));
}

TrainedModel TrainedModel::load(const std::string& dir) {
  const fs::path d(dir);
  const json manifest = json::parse(read_file(d / "manifest.json"));
  const std::string checkpoint = read_file(d / "checkpoint.json");
  const std::string config_text = read_file(d / "config.json");
  const std::string curve_text = read_file(d / "curve.csv");
  const auto& files = manifest.at("files");
  if (files.at("checkpoint.json") != hex(fnv1a64(checkpoint)) || files.at("config.json") != hex(fnv1a64(config_text)) ||
      files.at("curve.csv") != hex(fnv1a64(curve_text)))
    throw SchemaError("bundle '" + dir + "': file hash does not match the manifest");
  TrainedModel m;
  m.model_id = manifest.at("model_id").get<std::string>();
  m.frozen = manifest.at("frozen").get<bool>();
  m.agent = agent_from_checkpoint(json::parse(checkpoint));
  m.agent->set_frozen(m.frozen);
  const json cfg = json::parse(config_text);
  m.config = TrainingConfig::from_json(cfg.at("training"));
  m.info = cfg.value("info", json::object());
  m.curve = parse_curve_csv(curve_text);
  return m;
}

double pm_terminal_reward(env::Action agent1, env::Action agent2, env::Action human1, env::Action human2,
                          double k, double n) {
  const bool m1 = agent1 == human1, m2 = agent2 == human2;
  if (m1 && m2) return k + n;
  if (!m1 && !m2) return k - n;
  return k;
}

namespace {

int draw_games(const TrainingConfig& cfg, Rng& rng) {
  return static_cast<int>(rng.uniform_int(cfg.games_min, cfg.games_max));
}

void plan_exploration(rl::Agent& agent, const TrainingConfig& cfg) {
  if (auto* d = dynamic_cast<deep::DdqnAgent*>(&agent)) {
    const double planned = cfg.epochs * 0.5 * (cfg.games_min + cfg.games_max) * 2.0;
    d->set_epsilon_schedule(std::lround(cfg.epsilon_anneal_fraction * planned));
  }
}

TrainedModel finish(std::unique_ptr<rl::Agent> agent, std::vector<CurveRow> curve, const TrainingConfig& cfg,
                    std::string model_id, json info) {
  TrainedModel m;
  m.model_id = std::move(model_id);
  agent->set_frozen(true);
  m.agent = std::move(agent);
  m.curve = std::move(curve);
  m.config = cfg;
  m.info = std::move(info);
  m.frozen = true;
  return m;
}

}  // namespace

TrainedModel train_gm(std::unique_ptr<rl::Agent> agent, const env::TaskSpec& task, const TrainingConfig& cfg,
                      std::string model_id) {
  cfg.validate();
  if (!agent) throw ConfigError("train_gm: no agent");
  agent->require_unfrozen("train_gm");
  plan_exploration(*agent, cfg);
  auto* meta = dynamic_cast<deep::MetaAgent*>(agent.get());
  auto* ddqn = dynamic_cast<deep::DdqnAgent*>(agent.get());
  std::vector<CurveRow> curve;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(epoch), 0x676d}));
    env::TaskSpec spec = task;
    spec.n_trials = draw_games(cfg, rng);
    spec.goal_schedule.clear();
    if (spec.goal_alphabet.empty()) spec.goal_alphabet = task.goal_schedule;
    spec.env_seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(epoch), 0x656e76});
    env::Environment environment(spec);
    agent->begin_task(spec.graph);
    agent->reset_episode();
    double norm_sum = 0.0, loss_sum = 0.0;
    int norm_n = 0, loss_n = 0;
    do {
      const env::Goal goal = environment.current_goal();
      const rl::Observation o1{environment.current_state(), goal};
      const auto a1 = rl::sample_action(agent->act(o1), rng);
      const auto s1 = environment.step(a1);
      const rl::Observation o2{s1.next_state, goal};
      agent->observe({o1, a1, s1.reward, o2, false});
      if (ddqn && ddqn->last_loss()) loss_sum += *ddqn->last_loss(), ++loss_n;
      const auto a2 = rl::sample_action(agent->act(o2), rng);
      const double denom = environment.max_trial_value();
      const auto s2 = environment.step(a2);
      agent->observe({o2, a2, s2.reward, {s2.next_state, goal}, true});
      if (ddqn && ddqn->last_loss()) loss_sum += *ddqn->last_loss(), ++loss_n;
      if (denom > 0.0) norm_sum += s2.reward / denom, ++norm_n;
    } while (environment.advance_trial());
    CurveRow row;
    row.epoch = epoch;
    if (meta) {
      if (auto l = meta->end_episode()) row.loss = *l;
    } else if (loss_n > 0) {
      row.loss = loss_sum / loss_n;
    }
    if (norm_n > 0) row.mean_reward = norm_sum / norm_n;
    curve.push_back(row);
  }
  return finish(std::move(agent), std::move(curve), cfg, std::move(model_id), json::object());
}

namespace {

void check_subject(const data::SubjectDataset& subject, const env::TaskSpec& task) {
  if (subject.records.empty()) throw SchemaError("subject '" + subject.subject_id + "': no records");
  if (subject.n_trials() != task.n_trials)
    throw SchemaError("subject '" + subject.subject_id + "': " + std::to_string(subject.n_trials()) +
                      " trials, task '" + task.id + "' schedules " + std::to_string(task.n_trials));
  data::require_valid(subject, task);
}

// Likelihood of the agent as it would be evaluated: DDQN through a softmax
// read-out with a fitted inverse temperature.
LikelihoodResult evaluate_likelihood(const rl::Agent& agent, const data::SubjectDataset& subject,
                                     const env::TaskGraph& graph, const TrainingConfig& cfg, double* beta) {
  if (const auto* d = dynamic_cast<const deep::DdqnAgent*>(&agent)) {
    deep::DdqnAgent copy = *d;
    copy.set_frozen(false);
    copy.set_inv_temp(fit_inverse_temperature(*d, subject, cfg.holdout_fraction));
    copy.set_policy(deep::DdqnAgent::Policy::kSoftmax);
    if (beta) *beta = copy.config().inv_temp;
    return episode_likelihood(copy, subject, graph);
  }
  return episode_likelihood(agent, subject, graph);
}

}  // namespace

const std::vector<FitBounds>& pfc_fit_bounds() {
  // Same order as pfc_fit_parameter_names().
  static const std::vector<FitBounds> b = {
      {0.01, 1.0},   // mf_learning_rate
      {0.01, 1.0},   // mb_learning_rate
      {0.01, 2.0},   // inv_temp
      {0.01, 1.0},   // a_alpha
      {0.01, 1.0},   // a_beta
      {0.5, 50.0},   // b_alpha
      {0.5, 50.0},   // b_beta
      {0.01, 0.5},   // spe_threshold
      {0.5, 20.0},   // rpe_threshold
  };
  return b;
}

PfcFitResult fit_pfc(const arbitration::PfcAgent& agent, const data::SubjectDataset& subject,
                     const env::TaskGraph& graph, const TrainingConfig& cfg) {
  cfg.validate();
  const auto& bounds = pfc_fit_bounds();
  const std::size_t dim = bounds.size();
  if (arbitration::pfc_fit_parameter_names().size() != dim) throw ConfigError("pfc fit: bounds do not match");
  arbitration::PfcAgent probe = agent;
  probe.set_frozen(false);
  const arbitration::PfcParams base = agent.params();

  PfcFitResult res;
  auto evaluate = [&](const std::vector<double>& u, LikelihoodResult* full) {
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = std::exp(u[i]);
    probe.set_params(arbitration::pfc_from_fit_vector(base, v));
    ++res.evaluations;
    auto l = episode_likelihood(probe, subject, graph);
    if (full) *full = l;
    return l.log_sum;
  };
  std::vector<double> lo(dim), hi(dim);
  for (std::size_t i = 0; i < dim; ++i) lo[i] = std::log(bounds[i].lo), hi[i] = std::log(bounds[i].hi);

  std::vector<double> best_u;
  double best_f = -std::numeric_limits<double>::infinity();
  LikelihoodResult best_l;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  int epoch = 0;
  Rng rng(derive_seed(cfg.seed, {0x666974}));
  for (int restart = 0; restart < cfg.fit_restarts; ++restart) {
    std::vector<double> u(dim);
    const auto start = arbitration::pfc_fit_vector(base);
    for (std::size_t i = 0; i < dim; ++i)
      u[i] = restart == 0 ? std::clamp(std::log(start[i]), lo[i], hi[i]) : rng.uniform(lo[i], hi[i]);
    LikelihoodResult cur_l;
    double f = evaluate(u, &cur_l);
    for (int sweep = 0; sweep < cfg.fit_sweeps; ++sweep) {
      const double f_start = f;
      for (std::size_t i = 0; i < dim; ++i) {
        auto trial = u;
        auto at = [&](double x) {
          trial[i] = x;
          return evaluate(trial, nullptr);
        };
        double a = lo[i], b = hi[i];
        double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
        double f1 = at(x1), f2 = at(x2);
        double bx = u[i], bf = f;
        if (f1 > bf) bx = x1, bf = f1;
        if (f2 > bf) bx = x2, bf = f2;
        for (int k = 2; k < cfg.fit_line_evals; ++k) {
          if (f1 < f2) {
            a = x1, x1 = x2, f1 = f2, x2 = a + phi * (b - a), f2 = at(x2);
            if (f2 > bf) bx = x2, bf = f2;
          } else {
            b = x2, x2 = x1, f2 = f1, x1 = b - phi * (b - a), f1 = at(x1);
            if (f1 > bf) bx = x1, bf = f1;
          }
        }
        if (bf > f) {
          u[i] = bx;
          f = bf;
        }
      }
      evaluate(u, &cur_l);
      CurveRow row;
      row.epoch = epoch++;
      row.loss = -f;
      row.mean_likelihood = cur_l.mean;
      res.curve.push_back(row);
      if (f - f_start < 1e-4) break;
    }
    if (f > best_f) {
      best_f = f;
      best_u = u;
      best_l = cur_l;
    }
  }
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = std::exp(best_u[i]);
  res.params = arbitration::pfc_from_fit_vector(base, v);
  res.log_likelihood = best_f;
  res.likelihood_sum = best_l.sum;
  return res;
}

TrainedModel train_pm(std::unique_ptr<rl::Agent> agent, const data::SubjectDataset& subject,
                      const env::TaskSpec& task, const TrainingConfig& cfg, std::string model_id) {
  cfg.validate();
  if (!agent) throw ConfigError("train_pm: no agent");
  agent->require_unfrozen("train_pm");
  check_subject(subject, task);
  const auto& graph = task.graph;

  if (auto* pfc = dynamic_cast<arbitration::PfcAgent*>(agent.get())) {
    auto fit = fit_pfc(*pfc, subject, graph, cfg);
    pfc->set_params(fit.params);
    json info = {{"log_likelihood", fit.log_likelihood},
                 {"likelihood_sum", fit.likelihood_sum},
                 {"evaluations", fit.evaluations},
                 {"params", fit.params.to_json()}};
    return finish(std::move(agent), std::move(fit.curve), cfg, std::move(model_id), std::move(info));
  }
  if (dynamic_cast<rl::RandomAgent*>(agent.get())) {
    const auto l = episode_likelihood(*agent, subject, graph);
    CurveRow row;
    row.mean_likelihood = l.mean;
    return finish(std::move(agent), {row}, cfg, std::move(model_id), {{"likelihood_sum", l.sum}});
  }

  plan_exploration(*agent, cfg);
  auto* meta = dynamic_cast<deep::MetaAgent*>(agent.get());
  auto* ddqn = dynamic_cast<deep::DdqnAgent*>(agent.get());
  const bool sequential = agent->recurrent() || cfg.pm_credit == PmCredit::kBootstrap;
  const int n = subject.n_trials();
  std::vector<CurveRow> curve;
  double beta = 0.0;
  bool stopped = false;
  for (int epoch = 0; epoch < cfg.epochs && !stopped; ++epoch) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(epoch), 0x706d}));
    const int games = draw_games(cfg, rng);
    const int offset = static_cast<int>(rng.uniform_int(0, n - 1));
    agent->begin_task(graph);
    agent->reset_episode();
    double reward_sum = 0.0, loss_sum = 0.0;
    int loss_n = 0;
    auto take_loss = [&] {
      if (ddqn && ddqn->last_loss()) loss_sum += *ddqn->last_loss(), ++loss_n;
    };
    for (int g = 0; g < games; ++g) {
      const auto& r = subject.records[(offset + g) % n];
      const rl::Observation o1{r.s1, r.goal}, o2{r.s2, r.goal}, o3{r.s3, r.goal};
      if (sequential) {
        const auto a1 = rl::sample_action(agent->act(o1), rng);
        agent->observe({o1, a1, 0.0, o2, false});
        take_loss();
        const auto a2 = rl::sample_action(agent->act(o2), rng);
        const double R = pm_terminal_reward(a1, a2, r.a1, r.a2, cfg.pm_k, cfg.pm_n);
        agent->observe({o2, a2, R, o3, true});
        take_loss();
        reward_sum += R;
      } else {
        const auto a1 = rl::sample_action(agent->act(o1), rng);
        const auto a2 = rl::sample_action(agent->act(o2), rng);
        const double R = pm_terminal_reward(a1, a2, r.a1, r.a2, cfg.pm_k, cfg.pm_n);
        agent->observe({o1, a1, R, o2, true});
        take_loss();
        agent->observe({o2, a2, R, o3, true});
        take_loss();
        reward_sum += R;
      }
    }
    CurveRow row;
    row.epoch = epoch;
    if (meta) {
      if (auto l = meta->end_episode()) row.loss = *l;
    } else if (loss_n > 0) {
      row.loss = loss_sum / loss_n;
    }
    row.mean_reward = reward_sum / games;
    const bool last = epoch + 1 == cfg.epochs;
    if (epoch % cfg.eval_every == 0 || last || cfg.early_stop) {
      const auto l = evaluate_likelihood(*agent, subject, graph, cfg, &beta);
      row.mean_likelihood = l.mean;
      if (cfg.early_stop && l.sum > *cfg.early_stop) stopped = true;
    }
    curve.push_back(row);
  }
  json info = {{"epochs_run", curve.size()}, {"early_stopped", stopped}};
  if (ddqn) {
    if (curve.empty()) evaluate_likelihood(*agent, subject, graph, cfg, &beta);
    ddqn->set_inv_temp(beta);
    ddqn->set_policy(deep::DdqnAgent::Policy::kSoftmax);
    info["inv_temp"] = beta;
  }
  return finish(std::move(agent), std::move(curve), cfg, std::move(model_id), std::move(info));
}

}  // namespace mdtlab::training
