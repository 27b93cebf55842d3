#include "mdtlab/data/generator.hpp"

#include <cmath>
#include <cstdio>

#include "mdtlab/arbitration/pfc_agent.hpp"
#include "mdtlab/env/suite.hpp"
#include "mdtlab/error.hpp"
#include "mdtlab/rl/basic_agents.hpp"
#include "mdtlab/rng.hpp"
#include "mdtlab/training/session.hpp"

namespace mdtlab::data {

using nlohmann::json;

std::map<std::string, PriorRange> SubjectGeneratorConfig::default_priors() {
  return {
      {"mf_learning_rate", {0.02, 0.9}},
      {"mb_learning_rate", {0.02, 0.9}},
      {"inv_temp", {0.05, 2.0}},
      {"a_alpha", {0.05, 1.0}},
      {"a_beta", {0.05, 1.0}},
      {"b_alpha", {0.5, 50.0}},
      {"b_beta", {0.5, 50.0}},
      {"spe_threshold", {0.01, 0.5}},
      {"rpe_threshold", {0.5, 20.0}},
      {"sarsa_alpha", {0.05, 0.5}},
      {"sarsa_inv_temp", {0.05, 0.5}},
  };
}

void SubjectGeneratorConfig::validate() const {
  if (n_subjects <= 0) throw ConfigError("generator: n_subjects must be positive");
  if (session_length <= 0) throw ConfigError("generator: session_length must be positive");
  if (family != "pfc1" && family != "pfc2" && family != "sarsa" && family != "random" && family != "mixed")
    throw ConfigError("generator: unknown family '" + family + "'");
  const auto known = default_priors();
  for (const auto& [name, r] : priors) {
    if (!known.count(name)) throw ConfigError("generator: unknown prior '" + name + "'");
    if (!(r.lo > 0.0 && r.hi >= r.lo)) throw ConfigError("generator: prior '" + name + "' needs 0 < lo <= hi");
  }
  // Each prior must sit inside the parameter's valid domain.
  arbitration::PfcParams p;
  for (const auto& name : arbitration::pfc_fit_parameter_names()) {
    const auto it = priors.find(name);
    if (it == priors.end()) continue;
    for (double v : {it->second.lo, it->second.hi}) {
      auto vec = arbitration::pfc_fit_vector(p);
      const auto& names = arbitration::pfc_fit_parameter_names();
      for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) vec[i] = v;
      try {
        arbitration::pfc_from_fit_vector(p, vec).validate();
      } catch (const ConfigError& e) {
        throw ConfigError("generator: prior '" + name + "' outside the valid domain: " + e.what());
      }
    }
  }
  for (const char* name : {"sarsa_alpha"}) {
    const auto it = priors.find(name);
    if (it != priors.end() && it->second.hi > 1.0) throw ConfigError("generator: sarsa_alpha must be <= 1");
  }
}

json SubjectGeneratorConfig::to_json() const {
  json pr = json::object();
  for (const auto& [name, r] : priors) pr[name] = {r.lo, r.hi};
  return {{"n_subjects", n_subjects},
          {"family", family},
          {"priors", pr},
          {"session_length", session_length},
          {"master_seed", master_seed}};
}

SubjectGeneratorConfig SubjectGeneratorConfig::from_json(const json& j) {
  SubjectGeneratorConfig c;
  c.n_subjects = j.value("n_subjects", c.n_subjects);
  c.family = j.value("family", c.family);
  if (j.contains("priors")) {
    for (const auto& [name, v] : j.at("priors").items()) {
      if (!v.is_array() || v.size() != 2) throw ConfigError("generator: prior '" + name + "' must be [lo, hi]");
      c.priors[name] = {v[0].get<double>(), v[1].get<double>()};
    }
  }
  c.session_length = j.value("session_length", c.session_length);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.validate();
  return c;
}

std::string subject_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "sub%03d", index + 1);
  return buf;
}

env::TaskSpec subject_task(const SubjectGeneratorConfig& cfg, int index) {
  return env::original_task(cfg.session_length,
                            derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(index), 0x656e76}));
}

namespace {

double draw(const std::map<std::string, PriorRange>& priors, const std::string& name, double fallback, Rng& rng) {
  const auto it = priors.find(name);
  if (it == priors.end()) return fallback;
  return std::exp(rng.uniform(std::log(it->second.lo), std::log(it->second.hi)));
}

std::string family_of(const SubjectGeneratorConfig& cfg, int index) {
  if (cfg.family != "mixed") return cfg.family;
  static const char* kCycle[] = {"pfc1", "sarsa", "random"};
  return kCycle[index % 3];
}

}  // namespace

std::vector<GeneratedSubject> generate_subjects(const SubjectGeneratorConfig& cfg) {
  cfg.validate();
  std::vector<GeneratedSubject> out;
  out.reserve(cfg.n_subjects);
  for (int i = 0; i < cfg.n_subjects; ++i) {
    const std::string family = family_of(cfg, i);
    Rng rng(derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(i), 0x7072696f72}));
    std::unique_ptr<rl::Agent> agent;
    json params = json::object();
    if (family == "pfc1" || family == "pfc2") {
      const auto& names = arbitration::pfc_fit_parameter_names();
      const arbitration::PfcParams base;
      auto v = arbitration::pfc_fit_vector(base);
      for (std::size_t k = 0; k < names.size(); ++k) {
        v[k] = draw(cfg.priors, names[k], v[k], rng);
        params[names[k]] = v[k];
      }
      const auto variant = family == "pfc1" ? arbitration::PfcVariant::kThreshold : arbitration::PfcVariant::kMixture;
      agent = std::make_unique<arbitration::PfcAgent>(variant, arbitration::pfc_from_fit_vector(base, v));
    } else if (family == "sarsa") {
      rl::SarsaParams p;
      p.alpha = draw(cfg.priors, "sarsa_alpha", p.alpha, rng);
      p.inv_temp = draw(cfg.priors, "sarsa_inv_temp", p.inv_temp, rng);
      params = {{"alpha", p.alpha}, {"gamma", p.gamma}, {"inv_temp", p.inv_temp}};
      agent = std::make_unique<rl::SarsaAgent>(p);
    } else {
      agent = std::make_unique<rl::RandomAgent>();
    }
    GeneratedSubject s;
    s.task = subject_task(cfg, i);
    training::SessionOptions opt;
    opt.subject_id = subject_id(i);
    opt.action_seed = derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(i), 0x616374});
    s.dataset = training::run_session(*agent, s.task, opt);
    s.dataset.provenance.kind = "synthetic";
    s.dataset.provenance.detail = {{"generator", family}, {"master_seed", cfg.master_seed}, {"index", i},
                                   {"env_seed", s.task.env_seed}};
    s.truth = {{"subject_id", s.dataset.subject_id}, {"family", family}, {"params", params},
               {"env_seed", s.task.env_seed}};
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace mdtlab::data
