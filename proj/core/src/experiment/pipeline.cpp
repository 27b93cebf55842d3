#include "mdtlab/experiment/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mdtlab/analysis/behavior.hpp"
#include "mdtlab/analysis/mi.hpp"
#include "mdtlab/analysis/stats.hpp"
#include "mdtlab/arbitration/pfc_agent.hpp"
#include "mdtlab/deep/ddqn_agent.hpp"
#include "mdtlab/deep/meta_agent.hpp"
#include "mdtlab/env/suite.hpp"
#include "mdtlab/error.hpp"
#include "mdtlab/experiment/pool.hpp"
#include "mdtlab/experiment/table.hpp"
#include "mdtlab/rl/basic_agents.hpp"
#include "mdtlab/rng.hpp"
#include "mdtlab/training/session.hpp"
#include "mdtlab/training/trainer.hpp"

namespace mdtlab::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

void make_dirs(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + dir + "': " + ec.message());
}

bool bundle_complete(const std::string& dir) { return fs::exists(fs::path(dir) / "manifest.json"); }

// The checked-in schedule is replaced by the manifest's evaluation stream.
std::vector<env::TaskSpec> battery_tasks(const ExperimentManifest& m) {
  std::vector<env::TaskSpec> out;
  for (auto t : env::canonical_suite()) {
    if (std::find(m.tasks.begin(), m.tasks.end(), t.id) == m.tasks.end()) continue;
    t.env_seed = cell_seed(m.seeds.eval, "", "", t.id, "env");
    t.n_trials = m.eval_trials;
    t.goal_schedule.clear();
    out.push_back(std::move(t));
  }
  return out;
}

std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) {
    if (!out.empty()) out += ';';
    for (char c : f) out += (c == ',' || c == ';' || c == '\n') ? ' ' : c;
  }
  return out;
}

const std::vector<std::string> kGlmColumns = {"source",  "model_id",         "subject_id",       "task_id",
                                              "n",       "mean_y",           "r2",               "intercept",
                                              "beta_uncertainty", "beta_goal", "beta_prev_action", "beta_prev_state",
                                              "degenerate", "flags"};

std::vector<std::string> glm_row(const std::string& source, const std::string& model, const std::string& subject,
                                 const std::string& task, const analysis::GlmProfile& p) {
  std::vector<std::string> r = {source, model, subject, task, std::to_string(p.n), fmt(p.mean_y), fmt(p.r2),
                                fmt(p.intercept)};
  for (const auto& b : p.betas) r.push_back(fmt(b));
  r.push_back(p.degenerate ? "1" : "0");
  r.push_back(join_flags(p.flags));
  return r;
}

analysis::GlmProfile safe_profile(const data::SubjectDataset& ds, const env::TaskGraph& g) {
  try {
    return analysis::glm_profile(ds, g);
  } catch (const Error& e) {
    analysis::GlmProfile p;
    p.degenerate = true;
    p.flags.emplace_back(e.what());
    return p;
  }
}

struct BehaviorRow {
  std::string task, subject;
  bool missing = false;
  int n_trials = 0;
  std::optional<double> reward, reward_changed, optimality, consistency;
};

struct CellOut {
  bool missing = false;
  std::string reason;
  std::vector<BehaviorRow> behavior;
  std::vector<analysis::MiReport> mi;
  std::vector<analysis::GlmProfile> battery_glm;  // per task, in suite order
  std::optional<analysis::GlmProfile> recovery;
  data::SubjectDataset recovery_session;
};

}  // namespace

bool fail_label(const std::optional<double>& p) { return !(p && *p <= 0.05); }

std::unique_ptr<rl::Agent> make_agent(const ModelId& model, std::uint64_t seed, int n_states) {
  if (model.family == "random") return std::make_unique<rl::RandomAgent>();
  if (model.family == "ddqn") {
    deep::DdqnConfig c;
    c.seed = seed;
    c.n_states = n_states;
    return std::make_unique<deep::DdqnAgent>(c);
  }
  if (model.family == "meta") {
    deep::MetaConfig c;
    c.seed = seed;
    c.n_states = n_states;
    return std::make_unique<deep::MetaAgent>(c);
  }
  if (model.family == "pfc1") return std::make_unique<arbitration::PfcAgent>(arbitration::PfcVariant::kThreshold);
  if (model.family == "pfc2") return std::make_unique<arbitration::PfcAgent>(arbitration::PfcVariant::kMixture);
  throw ConfigError("make_agent: unknown family '" + model.family + "'");
}

analysis::GlmProfile simulated_profile(const rl::Agent& agent, const env::TaskSpec& task, int sessions,
                                       std::uint64_t seed, training::FreezeMode mode) {
  if (sessions < 1) throw ConfigError("simulated_profile: sessions must be positive");
  std::vector<analysis::GlmProfile> profiles;
  for (int k = 0; k < sessions; ++k) {
    training::SessionOptions opt;
    opt.action_seed = derive_seed(seed, {static_cast<std::uint64_t>(k)});
    opt.freeze_mode = mode;
    profiles.push_back(
        safe_profile(training::freeze_and_evaluate(agent, task, task.n_trials, opt), task.graph));
  }
  return analysis::average_profiles(profiles);
}

std::vector<CorpusEntry> load_corpus(const Layout& layout) {
  if (!fs::exists(layout.corpus_index())) throw Error("missing corpus: no " + layout.corpus_index());
  json index;
  try {
    index = json::parse(read_file(layout.corpus_index()));
  } catch (const json::exception& e) {
    throw SchemaError("corpus index: " + std::string(e.what()));
  }
  std::vector<CorpusEntry> out;
  for (const auto& s : index.at("subjects")) {
    CorpusEntry e;
    e.dataset = data::load_dataset(layout.corpus() + "/" + s.at("file").get<std::string>());
    e.task = env::TaskSpec::load(layout.corpus() + "/" + s.at("task").get<std::string>());
    if (hex64(data::dataset_hash(e.dataset)) != s.at("hash").get<std::string>())
      throw SchemaError("corpus: hash mismatch for " + s.at("file").get<std::string>());
    out.push_back(std::move(e));
  }
  if (out.empty()) throw SchemaError("corpus: no subjects");
  return out;
}

GenSummary cmd_gen(const ExperimentManifest& manifest) {
  const auto m = manifest.effective();
  m.validate();
  const Layout L{m.out_dir};
  make_dirs(L.corpus() + "/tasks");
  m.save(L.manifest());

  std::vector<CorpusEntry> entries;
  json truth = json::object();
  GenSummary sum;
  if (!m.data_dir.empty()) {
    sum.source = "external";
    if (!fs::is_directory(m.data_dir)) throw ConfigError("data_dir '" + m.data_dir + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(m.data_dir))
      if (f.is_regular_file() && f.path().extension() == ".csv") files.push_back(f.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("data_dir '" + m.data_dir + "' holds no .csv files");
    for (const auto& f : files) {
      CorpusEntry e;
      try {
        e.dataset = data::load_dataset(f.string());
      } catch (const SchemaError& err) {
        throw SchemaError(f.filename().string() + ": " + err.what());
      }
      e.task = env::original_task(e.dataset.n_trials(), 0);
      data::require_valid(e.dataset, e.task);
      e.dataset.task_id = e.task.id;
      e.dataset.provenance.kind = "external";
      e.dataset.provenance.detail = {{"file", f.filename().string()}, {"sha", hex64(fnv1a64(read_file(f.string())))}};
      entries.push_back(std::move(e));
    }
  } else {
    sum.source = "synthetic";
    for (auto& s : data::generate_subjects(m.corpus)) {
      truth[s.dataset.subject_id] = s.truth;
      entries.push_back({std::move(s.dataset), std::move(s.task)});
    }
  }

  json index = {{"schema", "mdtlab.corpus/1"}, {"source", sum.source}, {"subjects", json::array()}};
  std::map<std::string, int> seen;
  for (const auto& e : entries) {
    const auto& id = e.dataset.subject_id;
    if (id.empty() || id.find_first_of("/\\") != std::string::npos || id == kSharedOwner)
      throw SchemaError("corpus: unusable subject id '" + id + "'");
    if (seen[id]++) throw SchemaError("corpus: duplicate subject id '" + id + "'");
    data::save_dataset(e.dataset, L.corpus() + "/" + id + ".csv");
    e.task.save(L.corpus() + "/tasks/" + id + ".json");
    index["subjects"].push_back({{"id", id},
                                 {"file", id + ".csv"},
                                 {"task", "tasks/" + id + ".json"},
                                 {"n_trials", e.dataset.n_trials()},
                                 {"hash", hex64(data::dataset_hash(e.dataset))}});
  }
  write_file(L.corpus_index(), index.dump(2) + "\n");
  write_file(L.truth(), truth.dump(2) + "\n");
  sum.subjects = static_cast<int>(entries.size());
  return sum;
}

TrainSummary cmd_train(const ExperimentManifest& manifest, bool resume) {
  const auto m = manifest.effective();
  m.validate();
  const Layout L{m.out_dir};
  const auto corpus = load_corpus(L);

  struct Cell {
    ModelId model;
    int subject;  // -1 for GM
  };
  // PM-DDQN runs after the pfcRL1 fits it uses as a stopping reference.
  std::vector<Cell> first, second;
  TrainSummary sum;
  for (const auto& id : m.models) {
    const auto model = parse_model_id(id);
    if (!model.trained) continue;
    if (model.regime == training::Regime::kGM) {
      first.push_back({model, -1});
      ++sum.gm_bundles;
      continue;
    }
    for (int s = 0; s < static_cast<int>(corpus.size()); ++s) {
      (model.family == "ddqn" && m.early_stop_from_pfc ? second : first).push_back({model, s});
      ++sum.pm_bundles;
    }
  }

  auto pm_config = [&](const std::string& owner, const std::string& id) {
    training::TrainingConfig c = m.training;
    c.regime = training::Regime::kPM;
    c.seed = cell_seed(m.seeds.train, owner, id, "T10", "train");
    return c;
  };
  auto pfc_reference = [&](const CorpusEntry& e) {
    const std::string dir = L.bundle("PM-pfcRL1", e.dataset.subject_id);
    if (bundle_complete(dir)) return training::TrainedModel::load(dir).info.at("likelihood_sum").get<double>();
    auto tm = training::train_pm(std::make_unique<arbitration::PfcAgent>(), e.dataset, e.task,
                                 pm_config(e.dataset.subject_id, "PM-pfcRL1"), "PM-pfcRL1");
    return tm.info.at("likelihood_sum").get<double>();
  };

  std::atomic<int> trained{0}, resumed{0};
  auto run = [&](const Cell& cell) {
    const std::string owner = cell.subject < 0 ? kSharedOwner : corpus[cell.subject].dataset.subject_id;
    const std::string dir = L.bundle(cell.model.id, owner);
    if (resume && bundle_complete(dir)) {
      ++resumed;
      return;
    }
    const int n_states = cell.subject < 0 ? env::tree_graph().n_states() : corpus[cell.subject].task.graph.n_states();
    auto agent = make_agent(cell.model, cell_seed(m.seeds.train, owner, cell.model.id, "T10", "init"), n_states);
    training::TrainedModel tm;
    if (cell.subject < 0) {
      training::TrainingConfig c = m.training;
      c.regime = training::Regime::kGM;
      c.seed = cell_seed(m.seeds.train, owner, cell.model.id, "T10", "train");
      tm = training::train_gm(std::move(agent), env::original_task(), c, cell.model.id);
    } else {
      const auto& e = corpus[cell.subject];
      auto c = pm_config(owner, cell.model.id);
      if (cell.model.family == "ddqn" && m.early_stop_from_pfc) c.early_stop = pfc_reference(e);
      tm = training::train_pm(std::move(agent), e.dataset, e.task, c, cell.model.id);
    }
    tm.info["owner"] = owner;
    make_dirs(dir);
    tm.save(dir);
    ++trained;
  };
  for (const auto* phase : {&first, &second})
    parallel_for(phase->size(), m.jobs, [&](std::size_t i) { run((*phase)[i]); });
  sum.trained = trained;
  sum.resumed = resumed;
  return sum;
}

BatterySummary cmd_battery(const ExperimentManifest& manifest) {
  const auto m = manifest.effective();
  m.validate();
  const Layout L{m.out_dir};
  const auto corpus = load_corpus(L);
  const auto tasks = battery_tasks(m);
  // Cells run tasks in the manifest's permuted order; reports use suite order.
  std::vector<int> order;
  for (const auto& id : m.task_order)
    for (int t = 0; t < static_cast<int>(tasks.size()); ++t)
      if (tasks[t].id == id) order.push_back(t);

  const int n_sub = static_cast<int>(corpus.size());
  const int n_models = static_cast<int>(m.models.size());
  std::vector<CellOut> cells(static_cast<std::size_t>(n_sub) * n_models);
  for (const auto& t : tasks)
    for (const auto& id : m.models) make_dirs(L.battery() + "/" + t.id + "/" + id);

  parallel_for(cells.size(), m.jobs, [&](std::size_t ci) {
    const auto model = parse_model_id(m.models[ci / n_sub]);
    const auto& entry = corpus[ci % n_sub];
    const auto& sid = entry.dataset.subject_id;
    auto& out = cells[ci];
    std::unique_ptr<rl::Agent> agent;
    if (!model.trained) {
      agent = std::make_unique<rl::RandomAgent>();
    } else {
      const auto dir = L.bundle(model.id, model.regime == training::Regime::kGM ? kSharedOwner : sid);
      if (!bundle_complete(dir)) {
        out.missing = true;
        out.reason = "missing bundle";
        return;
      }
      agent = std::move(training::TrainedModel::load(dir).agent);
    }
    out.behavior.resize(tasks.size());
    out.mi.resize(tasks.size());
    out.battery_glm.resize(tasks.size());
    for (int t : order) {
      const auto& spec = tasks[t];
      training::SessionOptions opt;
      opt.subject_id = sid;
      opt.action_seed = cell_seed(m.seeds.eval, sid, model.id, spec.id, "act");
      opt.freeze_mode = m.freeze_mode;
      const auto ds = training::freeze_and_evaluate(*agent, spec, m.eval_trials, opt);
      data::save_dataset(ds, L.evaluation(spec.id, model.id, sid));
      auto& b = out.behavior[t];
      b.task = spec.id;
      b.subject = sid;
      b.n_trials = ds.n_trials();
      b.reward = analysis::normalized_reward(ds, spec.graph);
      b.reward_changed = analysis::normalized_reward(ds, spec.graph, analysis::RewardFilter::kActionChanged);
      b.optimality = analysis::choice_optimality(ds, spec.graph).mean;
      b.consistency = analysis::choice_consistency(ds);
      out.mi[t] = analysis::episode_mi(ds, spec.graph);
      out.mi[t].model_id = model.id;
      out.battery_glm[t] = safe_profile(ds, spec.graph);
    }
    const auto rseed = cell_seed(m.seeds.eval, sid, model.id, entry.task.id, "recovery");
    out.recovery = simulated_profile(*agent, entry.task, m.recovery_sessions, rseed, m.freeze_mode);
    training::SessionOptions opt;
    opt.subject_id = sid;
    opt.action_seed = derive_seed(rseed, {0});
    opt.freeze_mode = m.freeze_mode;
    out.recovery_session = training::freeze_and_evaluate(*agent, entry.task, entry.task.n_trials, opt);
  });

  // Aggregation: single pass, stable ordering (task, model, subject).
  make_dirs(L.reports());
  auto cell = [&](int model, int subject) -> const CellOut& { return cells[static_cast<std::size_t>(model) * n_sub + subject]; };
  BatterySummary sum;

  Table skipped({"model_id", "subject_id", "reason"});
  for (int mi = 0; mi < n_models; ++mi)
    for (int s = 0; s < n_sub; ++s)
      if (cell(mi, s).missing) {
        skipped.add({m.models[mi], corpus[s].dataset.subject_id, cell(mi, s).reason});
        sum.skipped += static_cast<int>(tasks.size());
      } else {
        sum.evaluations += static_cast<int>(tasks.size());
      }
  skipped.write(L.reports() + "/skipped.csv");

  Table behavior({"task_id", "model_id", "subject_id", "status", "n_trials", "normalized_reward",
                  "normalized_reward_changed", "choice_optimality", "choice_consistency"});
  Table mi_table({"task_id", "model_id", "subject_id", "n_pairs", "i_fa", "i_aa"});
  Table efficacy({"task_id", "model_id", "n_subjects", "n_ratio", "n_excluded", "ratio_mean", "ratio_sd", "slope",
                  "intercept", "r2", "p"});
  Table ttests({"task_id", "model_id", "n", "mean_model", "mean_random", "t", "df", "p", "p_greater", "fail"});
  Table glm(kGlmColumns);
  const auto random_it = std::find(m.models.begin(), m.models.end(), std::string(kRandom));
  const int random_idx = random_it == m.models.end() ? -1 : static_cast<int>(random_it - m.models.begin());

  for (int t = 0; t < static_cast<int>(tasks.size()); ++t) {
    const auto& tid = tasks[t].id;
    for (int mi = 0; mi < n_models; ++mi) {
      const auto& mid = m.models[mi];
      std::vector<analysis::MiReport> reports;
      for (int s = 0; s < n_sub; ++s) {
        const auto& c = cell(mi, s);
        const auto& sid = corpus[s].dataset.subject_id;
        if (c.missing) {
          behavior.add({tid, mid, sid, "skipped: " + c.reason, "0", "NA", "NA", "NA", "NA"});
          continue;
        }
        const auto& b = c.behavior[t];
        behavior.add({tid, mid, sid, "ok", std::to_string(b.n_trials), fmt(b.reward), fmt(b.reward_changed),
                      fmt(b.optimality), fmt(b.consistency)});
        mi_table.add({tid, mid, sid, std::to_string(c.mi[t].n_trials), fmt(c.mi[t].i_fa), fmt(c.mi[t].i_aa)});
        reports.push_back(c.mi[t]);
        glm.add(glm_row("battery", mid, sid, tid, c.battery_glm[t]));
      }
      const auto eff = analysis::encoding_efficacy(reports);
      efficacy.add({tid, mid, std::to_string(eff.n_subjects), std::to_string(eff.n_ratio),
                    std::to_string(eff.n_excluded), fmt(eff.ratio_mean), fmt(eff.ratio_sd),
                    fmt(eff.fit ? std::optional(eff.fit->slope) : std::nullopt),
                    fmt(eff.fit ? std::optional(eff.fit->intercept) : std::nullopt),
                    fmt(eff.fit ? std::optional(eff.fit->r2) : std::nullopt),
                    fmt(eff.fit ? std::optional(eff.fit->p) : std::nullopt)});
      if (random_idx < 0) continue;
      std::vector<double> a, b;
      for (int s = 0; s < n_sub; ++s) {
        const auto& cm = cell(mi, s);
        const auto& cr = cell(random_idx, s);
        if (cm.missing || cr.missing || !cm.behavior[t].reward || !cr.behavior[t].reward) continue;
        a.push_back(*cm.behavior[t].reward);
        b.push_back(*cr.behavior[t].reward);
      }
      const auto tt = a.size() >= 2 ? analysis::paired_ttest(a, b) : std::nullopt;
      const std::optional<double> p = tt ? std::optional(tt->p) : std::nullopt;
      ttests.add({tid, mid, std::to_string(a.size()), a.empty() ? "NA" : fmt(analysis::mean(a)),
                  b.empty() ? "NA" : fmt(analysis::mean(b)), fmt(tt ? std::optional(tt->t) : std::nullopt),
                  fmt(tt ? std::optional(tt->df) : std::nullopt), fmt(p),
                  fmt(tt ? std::optional(tt->p_greater) : std::nullopt), fail_label(p) ? "1" : "0"});
    }
  }

  // Recovery: each subject's own session against the model's simulated
  // sessions on the same task.
  std::vector<analysis::GlmProfile> human;
  for (const auto& e : corpus) {
    human.push_back(safe_profile(e.dataset, e.task.graph));
    glm.add(glm_row("human", "", e.dataset.subject_id, e.task.id, human.back()));
  }
  Table recovery({"mode", "model_id", "regressor", "n", "r", "p", "slope", "summary_r2"});
  for (int mi = 0; mi < n_models; ++mi) {
    std::vector<analysis::GlmProfile> h, mp;
    std::vector<data::SubjectDataset> hd, md;
    std::vector<env::TaskGraph> graphs;
    for (int s = 0; s < n_sub; ++s) {
      const auto& c = cell(mi, s);
      if (c.missing) continue;
      glm.add(glm_row("model", m.models[mi], corpus[s].dataset.subject_id, corpus[s].task.id, *c.recovery));
      h.push_back(human[s]);
      mp.push_back(*c.recovery);
      hd.push_back(corpus[s].dataset);
      md.push_back(c.recovery_session);
      graphs.push_back(corpus[s].task.graph);
    }
    const auto rr = analysis::recovery_test(h, mp);
    for (const auto& r : rr.per_regressor)
      recovery.add({"subjects", m.models[mi], r.regressor, std::to_string(r.n),
                    fmt(r.correlation ? std::optional(r.correlation->r) : std::nullopt),
                    fmt(r.correlation ? std::optional(r.correlation->p) : std::nullopt), fmt(r.slope),
                    fmt(rr.summary_r2)});
    const auto bins = hd.empty() ? std::nullopt : analysis::recovery_by_condition_bins(hd, md, graphs);
    recovery.add({"condition_bins", m.models[mi], "optimality", std::to_string(bins ? bins->n : 0),
                  fmt(bins ? std::optional(bins->r) : std::nullopt), fmt(bins ? std::optional(bins->p) : std::nullopt),
                  "NA", "NA"});
  }

  behavior.write(L.reports() + "/behavior_metrics.csv");
  mi_table.write(L.reports() + "/mi_reports.csv");
  efficacy.write(L.reports() + "/efficacy.csv");
  ttests.write(L.reports() + "/ttests.csv");
  glm.write(L.reports() + "/glm_profiles.csv");
  recovery.write(L.reports() + "/recovery.csv");
  return sum;
}

ReportSummary cmd_report(const std::string& out_dir) {
  const Layout L{out_dir};
  for (const char* f : {"behavior_metrics.csv", "mi_reports.csv", "ttests.csv", "glm_profiles.csv"})
    if (!fs::exists(L.reports() + "/" + f)) throw Error("report: missing " + L.reports() + "/" + f);
  const auto behavior = Table::read(L.reports() + "/behavior_metrics.csv");
  const auto mi = Table::read(L.reports() + "/mi_reports.csv");
  const auto tt = Table::read(L.reports() + "/ttests.csv");
  const auto glm = Table::read(L.reports() + "/glm_profiles.csv");
  if (behavior.rows.empty() || mi.rows.empty()) throw Error("report: empty battery reports");
  make_dirs(L.figures());
  ReportSummary sum;
  auto emit = [&](const Table& t, const std::string& name) {
    t.write(L.figures() + "/" + name);
    sum.files.push_back(name);
  };

  // Task and model order as first seen in the behavior report.
  std::vector<std::string> tasks, models;
  auto note = [](std::vector<std::string>& v, const std::string& x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
  };
  for (std::size_t r = 0; r < behavior.rows.size(); ++r) {
    note(tasks, behavior.at(r, "task_id"));
    note(models, behavior.at(r, "model_id"));
  }

  auto grid = [&](const std::string& metric, bool with_fail) {
    std::vector<std::string> cols = {"task_id"};
    for (const auto& mdl : models) {
      cols.push_back(mdl);
      if (with_fail) cols.push_back(mdl + "_fail");
    }
    Table out(cols);
    for (const auto& task : tasks) {
      std::vector<std::string> row = {task};
      for (const auto& mdl : models) {
        std::vector<double> xs;
        for (std::size_t r = 0; r < behavior.rows.size(); ++r)
          if (behavior.at(r, "task_id") == task && behavior.at(r, "model_id") == mdl)
            if (auto v = parse_number(behavior.at(r, metric))) xs.push_back(*v);
        row.push_back(xs.empty() ? std::string(kNA) : fmt(analysis::mean(xs)));
        if (with_fail) {
          std::string flag(kNA);
          for (std::size_t r = 0; r < tt.rows.size(); ++r)
            if (tt.at(r, "task_id") == task && tt.at(r, "model_id") == mdl)
              flag = tt.at(r, "fail") == "1" ? "FAIL" : "";
          row.push_back(flag);
        }
      }
      out.add(std::move(row));
    }
    return out;
  };
  emit(grid("normalized_reward", true), "reward_grid.csv");
  emit(grid("choice_consistency", false), "consistency_grid.csv");

  Table plane({"task_id", "model_id", "subject_id", "i_fa", "i_aa"});
  for (std::size_t r = 0; r < mi.rows.size(); ++r)
    plane.add({mi.at(r, "task_id"), mi.at(r, "model_id"), mi.at(r, "subject_id"), mi.at(r, "i_fa"), mi.at(r, "i_aa")});
  emit(plane, "mi_plane.csv");

  // Human vs model betas on the subject's own task.
  std::map<std::string, std::size_t> human_row;
  for (std::size_t r = 0; r < glm.rows.size(); ++r)
    if (glm.at(r, "source") == "human") human_row[glm.at(r, "subject_id")] = r;
  Table scatter({"model_id", "subject_id", "regressor", "beta_human", "beta_model"});
  for (std::size_t r = 0; r < glm.rows.size(); ++r) {
    if (glm.at(r, "source") != "model") continue;
    const auto it = human_row.find(glm.at(r, "subject_id"));
    if (it == human_row.end()) continue;
    for (const char* reg : analysis::kRegressorNames) {
      const std::string col = std::string("beta_") + reg;
      scatter.add({glm.at(r, "model_id"), glm.at(r, "subject_id"), reg, glm.at(it->second, col), glm.at(r, col)});
    }
  }
  emit(scatter, "recovery_scatter.csv");

  Table curves({"model_id", "owner", "epoch", "loss", "mean_reward", "mean_likelihood"});
  if (fs::exists(L.models())) {
    std::vector<fs::path> dirs;
    for (const auto& mdl : fs::directory_iterator(L.models()))
      if (mdl.is_directory())
        for (const auto& own : fs::directory_iterator(mdl.path()))
          if (own.is_directory() && bundle_complete(own.path().string())) dirs.push_back(own.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      const auto rows = training::parse_curve_csv(read_file((d / "curve.csv").string()));
      for (const auto& row : rows)
        curves.add({d.parent_path().filename().string(), d.filename().string(), std::to_string(row.epoch),
                    fmt(row.loss), fmt(row.mean_reward), fmt(row.mean_likelihood)});
    }
  }
  emit(curves, "training_curves.csv");
  return sum;
}

}  // namespace mdtlab::experiment
