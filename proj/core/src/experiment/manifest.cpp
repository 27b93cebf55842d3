#include "mdtlab/experiment/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mdtlab/env/suite.hpp"
#include "mdtlab/error.hpp"
#include "mdtlab/rng.hpp"

namespace mdtlab::experiment {

using nlohmann::json;

const std::vector<std::string>& model_roster() {
  static const std::vector<std::string> roster = {"random",    "GM-DDQN",   "PM-DDQN",  "GM-metaRL",
                                                  "PM-metaRL", "PM-pfcRL1", "PM-pfcRL2"};
  return roster;
}

ModelId parse_model_id(std::string_view id) {
  ModelId m;
  m.id = std::string(id);
  if (id == kRandom) {
    m.family = "random";
    return m;
  }
  m.trained = true;
  if (id.size() < 4 || id[2] != '-') throw ConfigError("unknown model '" + m.id + "'");
  const auto regime = id.substr(0, 2);
  const auto body = id.substr(3);
  if (regime == "GM") m.regime = training::Regime::kGM;
  else if (regime == "PM") m.regime = training::Regime::kPM;
  else throw ConfigError("unknown model '" + m.id + "'");
  if (body == "DDQN") m.family = "ddqn";
  else if (body == "metaRL") m.family = "meta";
  else if (body == "pfcRL1" && m.regime == training::Regime::kPM) m.family = "pfc1";
  else if (body == "pfcRL2" && m.regime == training::Regime::kPM) m.family = "pfc2";
  else throw ConfigError("unknown model '" + m.id + "'");
  return m;
}

json DeskScale::to_json() const {
  return {{"subjects", subjects}, {"epochs", epochs}, {"games", games}, {"trials", trials}};
}

DeskScale DeskScale::from_json(const json& j) {
  DeskScale d;
  d.subjects = j.value("subjects", d.subjects);
  d.epochs = j.value("epochs", d.epochs);
  d.games = j.value("games", d.games);
  d.trials = j.value("trials", d.trials);
  for (double f : {d.subjects, d.epochs, d.games, d.trials})
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("desk scale factors must lie in (0, 1]");
  return d;
}

std::uint64_t cell_seed(std::uint64_t master, std::string_view subject, std::string_view model,
                        std::string_view task, std::string_view stage) {
  return derive_seed(master, {hash_string(subject), hash_string(model), hash_string(task), hash_string(stage)});
}

namespace {

std::vector<std::string> suite_ids() {
  std::vector<std::string> ids;
  for (const auto& t : env::canonical_suite()) ids.push_back(t.id);
  return ids;
}

std::vector<std::string> permuted(std::vector<std::string> v, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
  return v;
}

int scaled(int n, double f, int floor) { return std::max(floor, static_cast<int>(std::lround(n * f))); }

}  // namespace

ExperimentManifest ExperimentManifest::make(std::uint64_t master_seed) {
  ExperimentManifest m;
  m.master_seed = master_seed;
  m.seeds.corpus = derive_seed(master_seed, {hash_string("corpus")});
  m.seeds.train = derive_seed(master_seed, {hash_string("train")});
  m.seeds.eval = derive_seed(master_seed, {hash_string("eval")});
  m.seeds.order = derive_seed(master_seed, {hash_string("order")});
  m.corpus.master_seed = m.seeds.corpus;
  m.tasks = suite_ids();
  m.task_order = permuted(m.tasks, m.seeds.order);
  return m;
}

void ExperimentManifest::validate() const {
  corpus.validate();
  training.validate();
  if (models.empty()) throw ConfigError("manifest: empty model list");
  std::set<std::string> seen;
  for (const auto& id : models) {
    parse_model_id(id);
    if (!seen.insert(id).second) throw ConfigError("manifest: duplicate model '" + id + "'");
  }
  if (tasks.empty()) throw ConfigError("manifest: empty task list");
  const auto known = suite_ids();
  for (const auto& t : tasks)
    if (std::find(known.begin(), known.end(), t) == known.end()) throw ConfigError("manifest: unknown task '" + t + "'");
  auto a = tasks, b = task_order;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw ConfigError("manifest: task_order is not a permutation of tasks");
  if (eval_trials < 2) throw ConfigError("manifest: eval_trials must be at least 2");
  if (recovery_sessions < 1) throw ConfigError("manifest: recovery_sessions must be positive");
  if (jobs < 1) throw ConfigError("manifest: jobs must be positive");
  if (out_dir.empty()) throw ConfigError("manifest: empty out_dir");
}

ExperimentManifest ExperimentManifest::effective() const {
  ExperimentManifest m = *this;
  if (!desk_scale) return m;
  m.corpus.n_subjects = scaled(corpus.n_subjects, desk.subjects, 2);
  m.training.epochs = scaled(training.epochs, desk.epochs, 1);
  m.training.games_min = scaled(training.games_min, desk.games, 1);
  m.training.games_max = std::max(m.training.games_min, scaled(training.games_max, desk.games, 1));
  m.eval_trials = scaled(eval_trials, desk.trials, 2);
  return m;
}

json ExperimentManifest::to_json() const {
  return {{"schema", "mdtlab.manifest/1"},
          {"name", name},
          {"master_seed", master_seed},
          {"seeds", {{"corpus", seeds.corpus}, {"train", seeds.train}, {"eval", seeds.eval}, {"order", seeds.order}}},
          {"corpus", corpus.to_json()},
          {"data_dir", data_dir},
          {"models", models},
          {"tasks", tasks},
          {"task_order", task_order},
          {"training", training.to_json()},
          {"eval_trials", eval_trials},
          {"recovery_sessions", recovery_sessions},
          {"freeze_mode", to_string(freeze_mode)},
          {"early_stop_from_pfc", early_stop_from_pfc},
          {"out_dir", out_dir},
          {"jobs", jobs},
          {"desk_scale", desk_scale},
          {"desk", desk.to_json()}};
}

ExperimentManifest ExperimentManifest::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("manifest: expected a JSON object");
  ExperimentManifest m = make(j.value("master_seed", std::uint64_t{1}));
  try {
    m.name = j.value("name", m.name);
    if (j.contains("seeds")) {
      const auto& s = j.at("seeds");
      m.seeds.corpus = s.value("corpus", m.seeds.corpus);
      m.seeds.train = s.value("train", m.seeds.train);
      m.seeds.eval = s.value("eval", m.seeds.eval);
      m.seeds.order = s.value("order", m.seeds.order);
    }
    m.corpus.master_seed = m.seeds.corpus;
    if (j.contains("corpus")) {
      json c = j.at("corpus");
      if (!c.contains("master_seed")) c["master_seed"] = m.seeds.corpus;
      m.corpus = data::SubjectGeneratorConfig::from_json(c);
    }
    m.data_dir = j.value("data_dir", m.data_dir);
    if (j.contains("models")) m.models = j.at("models").get<std::vector<std::string>>();
    if (j.contains("tasks")) {
      m.tasks = j.at("tasks").get<std::vector<std::string>>();
      m.task_order = permuted(m.tasks, m.seeds.order);
    }
    if (j.contains("task_order")) m.task_order = j.at("task_order").get<std::vector<std::string>>();
    if (j.contains("training")) m.training = training::TrainingConfig::from_json(j.at("training"));
    m.eval_trials = j.value("eval_trials", m.eval_trials);
    m.recovery_sessions = j.value("recovery_sessions", m.recovery_sessions);
    if (j.contains("freeze_mode")) m.freeze_mode = training::parse_freeze_mode(j.at("freeze_mode").get<std::string>());
    m.early_stop_from_pfc = j.value("early_stop_from_pfc", m.early_stop_from_pfc);
    m.out_dir = j.value("out_dir", m.out_dir);
    m.jobs = j.value("jobs", m.jobs);
    m.desk_scale = j.value("desk_scale", m.desk_scale);
    if (j.contains("desk")) m.desk = DeskScale::from_json(j.at("desk"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  m.validate();
  return m;
}

ExperimentManifest ExperimentManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("manifest: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("manifest: " + path + ": " + e.what());
  }
  return from_json(j);
}

void ExperimentManifest::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("manifest: cannot write '" + path + "'");
  out << to_json().dump(2) << "\n";
  if (!out) throw Error("manifest: write failed for '" + path + "'");
}

}  // namespace mdtlab::experiment
