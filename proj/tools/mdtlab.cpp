// mdtlab command line: corpus generation, training, the task battery and
// figure tables.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdtlab/data/dataset.hpp"
#include "mdtlab/env/suite.hpp"
#include "mdtlab/error.hpp"
#include "mdtlab/experiment/manifest.hpp"
#include "mdtlab/experiment/pipeline.hpp"

namespace {

using namespace mdtlab;
using experiment::ExperimentManifest;

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

struct Common {
  std::string manifest_path;
  std::string out;
  int jobs = 0;
  bool desk = false;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--manifest", c.manifest_path, "experiment manifest (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (overrides the manifest)");
  cmd->add_option("--jobs", c.jobs, "worker threads (overrides the manifest)")->check(CLI::PositiveNumber);
  cmd->add_flag("--desk-scale", c.desk, "shrink subjects, epochs and trials by the desk factors");
  cmd->add_option("--seed", c.seed, "master seed when no manifest is given");
}

ExperimentManifest resolve(const Common& c) {
  auto m = c.manifest_path.empty() ? ExperimentManifest::make(c.seed) : ExperimentManifest::load(c.manifest_path);
  if (!c.out.empty()) m.out_dir = c.out;
  if (c.jobs > 0) m.jobs = c.jobs;
  if (c.desk) m.desk_scale = true;
  m.validate();
  return m;
}

int validate_files(const std::vector<std::string>& files, const std::string& task_path) {
  int bad = 0;
  for (const auto& f : files) {
    try {
      const auto ds = data::load_dataset(f);
      const auto task = task_path.empty() ? env::original_task(ds.n_trials(), 0) : env::TaskSpec::load(task_path);
      const auto rep = data::validate_against_task(ds, task);
      if (rep.ok()) {
        std::printf("%s: ok (%d trials)\n", f.c_str(), ds.n_trials());
      } else {
        std::printf("%s: invalid\n%s\n", f.c_str(), rep.summary().c_str());
        ++bad;
      }
    } catch (const SchemaError& e) {
      std::printf("%s: invalid\n  %s\n", f.c_str(), e.what());
      ++bad;
    }
  }
  return bad == 0 ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mdtlab: two-stage decision task workbench"};
  app.require_subcommand(1);

  Common gen_opt, train_opt, battery_opt, run_opt;
  bool resume = false, run_resume = false;
  auto* gen = app.add_subcommand("gen", "write the subject corpus and ground truth");
  add_common(gen, gen_opt);
  auto* train = app.add_subcommand("train", "train GM models once and PM models per subject");
  add_common(train, train_opt);
  train->add_flag("--resume", resume, "keep bundles that are already complete");
  auto* battery = app.add_subcommand("battery", "frozen evaluation on every task, then reports");
  add_common(battery, battery_opt);
  auto* run = app.add_subcommand("run", "gen, train, battery and report in sequence");
  add_common(run, run_opt);
  run->add_flag("--resume", run_resume, "keep bundles that are already complete");

  std::string report_dir, report_manifest;
  auto* report = app.add_subcommand("report", "aggregate reports into figure tables");
  report->add_option("--out", report_dir, "output directory of a battery run");
  report->add_option("--manifest", report_manifest, "take the output directory from a manifest")
      ->check(CLI::ExistingFile);

  std::vector<std::string> files;
  std::string task_path, check_manifest;
  auto* validate = app.add_subcommand("validate", "check subject CSV files or a manifest");
  validate->add_option("files", files, "subject CSV files")->check(CLI::ExistingFile);
  validate->add_option("--task", task_path, "task spec JSON the files were recorded on")->check(CLI::ExistingFile);
  validate->add_option("--manifest", check_manifest, "manifest to validate")->check(CLI::ExistingFile);

  std::string suite_dir;
  auto* suite = app.add_subcommand("suite", "write the ten battery task specs as JSON");
  suite->add_option("--out", suite_dir, "directory for T01.json .. T10.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  try {
    auto do_gen = [](const ExperimentManifest& m) {
      const auto s = experiment::cmd_gen(m);
      std::printf("gen: %d %s subjects -> %s/corpus\n", s.subjects, s.source.c_str(), m.out_dir.c_str());
    };
    auto do_train = [](const ExperimentManifest& m, bool res) {
      const auto s = experiment::cmd_train(m, res);
      std::printf("train: %d GM + %d PM bundles (%d trained, %d already complete)\n", s.gm_bundles, s.pm_bundles,
                  s.trained, s.resumed);
    };
    auto do_battery = [](const ExperimentManifest& m) {
      const auto s = experiment::cmd_battery(m);
      std::printf("battery: %d evaluations, %d skipped -> %s/reports\n", s.evaluations, s.skipped, m.out_dir.c_str());
    };
    auto do_report = [](const std::string& dir) {
      const auto s = experiment::cmd_report(dir);
      for (const auto& f : s.files) std::printf("report: %s/figures/%s\n", dir.c_str(), f.c_str());
    };

    if (*gen) do_gen(resolve(gen_opt));
    if (*train) do_train(resolve(train_opt), resume);
    if (*battery) do_battery(resolve(battery_opt));
    if (*run) {
      const auto m = resolve(run_opt);
      do_gen(m);
      do_train(m, run_resume);
      do_battery(m);
      do_report(m.out_dir);
    }
    if (*report) {
      std::string dir = report_dir;
      if (dir.empty() && !report_manifest.empty()) dir = ExperimentManifest::load(report_manifest).out_dir;
      if (dir.empty()) throw ConfigError("report: give --out or --manifest");
      do_report(dir);
    }
    if (*validate) {
      if (files.empty() && check_manifest.empty()) throw ConfigError("validate: nothing to check");
      if (!check_manifest.empty()) {
        ExperimentManifest::load(check_manifest);
        std::printf("%s: ok\n", check_manifest.c_str());
      }
      if (!files.empty()) return validate_files(files, task_path);
    }
    if (*suite) {
      std::filesystem::create_directories(suite_dir);
      for (const auto& t : env::canonical_suite()) {
        t.save(suite_dir + "/" + t.id + ".json");
        std::printf("%s/%s.json\n", suite_dir.c_str(), t.id.c_str());
      }
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "mdtlab: %s\n", e.what());
    return kValidation;
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "mdtlab: %s\n", e.what());
    return kValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mdtlab: %s\n", e.what());
    return kRuntime;
  }
  return kOk;
}
