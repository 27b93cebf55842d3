#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdtlab/data/dataset.hpp"
#include "mdtlab/env/task.hpp"

namespace mdtlab::data {

struct PriorRange {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const PriorRange&) const = default;
};

struct SubjectGeneratorConfig {
  int n_subjects = 82;
  // pfc1 | pfc2 | sarsa | random | mixed (a third each of pfc1, sarsa, random)
  std::string family = "pfc1";
  // Log-uniform priors keyed by parameter name; missing names keep defaults.
  std::map<std::string, PriorRange> priors = default_priors();
  int session_length = 400;
  std::uint64_t master_seed = 1;

  static std::map<std::string, PriorRange> default_priors();
  void validate() const;
  nlohmann::json to_json() const;
  static SubjectGeneratorConfig from_json(const nlohmann::json& j);
};

struct GeneratedSubject {
  SubjectDataset dataset;
  env::TaskSpec task;
  nlohmann::json truth;  // family and true parameters
};

// The task each subject played: the original task with a subject seed.
env::TaskSpec subject_task(const SubjectGeneratorConfig& cfg, int index);
std::string subject_id(int index);

std::vector<GeneratedSubject> generate_subjects(const SubjectGeneratorConfig& cfg);

}  // namespace mdtlab::data
