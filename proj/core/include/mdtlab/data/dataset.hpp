#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdtlab/env/task.hpp"

namespace mdtlab::data {

using env::Action;
using env::Goal;
using env::Uncertainty;

// One trial: s1 -a1-> s2 -a2-> s3, with the money reward at s3.
struct BehaviorRecord {
  int trial = 0;
  Goal goal = Goal::kFlexible;
  Uncertainty uncertainty = Uncertainty::kLow;
  double p_transition = 0.5;
  int s1 = 0;
  Action a1 = Action::kLeft;
  int s2 = 0;
  Action a2 = Action::kLeft;
  int s3 = 0;
  double reward = 0.0;
  int block = -1;  // -1 when the task has no blocks

  bool operator==(const BehaviorRecord&) const = default;
};

struct Provenance {
  std::string kind = "synthetic";  // synthetic | external
  nlohmann::json detail = nlohmann::json::object();
  bool operator==(const Provenance&) const = default;
};

struct SubjectDataset {
  std::string subject_id;
  std::string task_id;
  std::vector<BehaviorRecord> records;
  Provenance provenance;

  int n_trials() const { return static_cast<int>(records.size()); }
  bool operator==(const SubjectDataset&) const = default;
};

inline constexpr std::string_view kDatasetHeader = "# mdt-behavior v1";
inline constexpr std::string_view kDatasetColumns =
    "subject_id,trial,goal,uncertainty,p_transition,s1,a1,s2,a2,s3,reward,block";

// State ids are written as 1-based names S1, S2, ...
std::string state_name(int id);
int parse_state_name(std::string_view s);

std::string to_csv(const SubjectDataset& ds);
SubjectDataset from_csv(const std::string& text);
SubjectDataset load_dataset(const std::string& path);
void save_dataset(const SubjectDataset& ds, const std::string& path);

// FNV-1a of the serialized form.
std::uint64_t dataset_hash(const SubjectDataset& ds);

struct Violation {
  int row = 0;  // record position, 0-based
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary(std::size_t max_items = 10) const;
};

ValidationReport validate_against_task(const SubjectDataset& ds, const env::TaskSpec& spec);

// Throws SchemaError with the summary when the report is not clean.
void require_valid(const SubjectDataset& ds, const env::TaskSpec& spec);

}  // namespace mdtlab::data
