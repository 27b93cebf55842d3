#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <set>

#include "mdtlab/env/suite.hpp"
#include "mdtlab/error.hpp"
#include "mdtlab/experiment/manifest.hpp"
#include "mdtlab/experiment/pipeline.hpp"
#include "mdtlab/experiment/pool.hpp"
#include "mdtlab/experiment/table.hpp"
#include "support.hpp"

using namespace mdtlab;
using namespace mdtlab::experiment;
namespace fs = std::filesystem;

namespace {

const std::string kCli = MDTLAB_CLI;

ExperimentManifest tiny(const std::string& out, std::vector<std::string> models) {
  auto m = ExperimentManifest::make(5);
  m.corpus.n_subjects = 2;
  m.corpus.session_length = 60;
  m.models = std::move(models);
  m.tasks = {"T10", "T03"};
  m.task_order = {"T03", "T10"};
  m.training.epochs = 2;
  m.training.games_min = 20;
  m.training.games_max = 30;
  m.training.fit_restarts = 1;
  m.training.fit_sweeps = 1;
  m.training.fit_line_evals = 4;
  m.eval_trials = 40;
  m.recovery_sessions = 1;
  m.out_dir = out;
  return m;
}

std::map<std::string, std::uint64_t> hash_tree(const fs::path& root) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& f : fs::recursive_directory_iterator(root))
    if (f.is_regular_file()) out[fs::relative(f.path(), root).string()] = fnv1a64(test::slurp(f.path().string()));
  return out;
}

int count_bundles(const fs::path& models) {
  int n = 0;
  if (!fs::exists(models)) return 0;
  for (const auto& f : fs::recursive_directory_iterator(models)) n += f.path().filename() == "manifest.json";
  return n;
}

int cli(const std::string& args, std::string* out = nullptr) {
  std::string sink;
  return test::run_capture(kCli + " " + args, out ? *out : sink);
}

}  // namespace

// ---- manifest

TEST(Manifest, DefaultRecordsEverySeedAndPermutesTasks) {
  const auto m = ExperimentManifest::make(3);
  EXPECT_EQ(m.models, model_roster());
  EXPECT_EQ(m.tasks.size(), 10u);
  EXPECT_EQ(std::multiset<std::string>(m.task_order.begin(), m.task_order.end()),
            std::multiset<std::string>(m.tasks.begin(), m.tasks.end()));
  EXPECT_NE(m.task_order, m.tasks);
  std::set<std::uint64_t> seeds = {m.seeds.corpus, m.seeds.train, m.seeds.eval, m.seeds.order};
  EXPECT_EQ(seeds.size(), 4u);
  EXPECT_EQ(m.corpus.master_seed, m.seeds.corpus);
  EXPECT_EQ(ExperimentManifest::make(3).to_json(), m.to_json());
  EXPECT_NE(ExperimentManifest::make(4).seeds.train, m.seeds.train);
  m.validate();
}

TEST(Manifest, JsonRoundTripReconstructsTheRun) {
  test::TempDir dir("manifest");
  auto m = tiny(dir / "out", {"random", "PM-pfcRL1"});
  m.freeze_mode = training::FreezeMode::kFullState;
  m.desk_scale = true;
  m.jobs = 3;
  m.save(dir / "m.json");
  const auto back = ExperimentManifest::load(dir / "m.json");
  EXPECT_EQ(back.to_json(), m.to_json());
  EXPECT_EQ(back.freeze_mode, training::FreezeMode::kFullState);
}

TEST(Manifest, ValidationRejectsBadManifests) {
  auto bad = [](auto mutate) {
    auto m = ExperimentManifest::make(1);
    mutate(m);
    EXPECT_THROW(m.validate(), ConfigError);
  };
  bad([](ExperimentManifest& m) { m.models = {"random", "PM-SARSA"}; });
  bad([](ExperimentManifest& m) { m.models = {"random", "random"}; });
  bad([](ExperimentManifest& m) { m.models.clear(); });
  bad([](ExperimentManifest& m) { m.tasks.push_back("T11"); });
  bad([](ExperimentManifest& m) { m.task_order.pop_back(); });
  bad([](ExperimentManifest& m) { m.jobs = 0; });
  bad([](ExperimentManifest& m) { m.corpus.n_subjects = 0; });
  bad([](ExperimentManifest& m) { m.training.pm_k = 0; });
  bad([](ExperimentManifest& m) { m.eval_trials = 1; });
  EXPECT_THROW(ExperimentManifest::from_json(nlohmann::json::array()), ConfigError);
}

TEST(Manifest, DeskScaleShrinksCounts) {
  auto m = ExperimentManifest::make(1);
  EXPECT_EQ(m.effective().to_json(), m.to_json());
  m.desk_scale = true;
  const auto e = m.effective();
  EXPECT_EQ(e.corpus.n_subjects, 8);
  EXPECT_EQ(e.training.epochs, 20);
  EXPECT_EQ(e.training.games_min, 100);
  EXPECT_EQ(e.training.games_max, 200);
  EXPECT_EQ(e.eval_trials, 200);
  m.corpus.n_subjects = 3;
  EXPECT_EQ(m.effective().corpus.n_subjects, 2);  // floor
}

TEST(Manifest, ModelIds) {
  const auto gm = parse_model_id("GM-DDQN");
  EXPECT_TRUE(gm.trained);
  EXPECT_EQ(gm.regime, training::Regime::kGM);
  EXPECT_EQ(gm.family, "ddqn");
  EXPECT_EQ(parse_model_id("PM-metaRL").family, "meta");
  EXPECT_EQ(parse_model_id("PM-pfcRL2").family, "pfc2");
  EXPECT_FALSE(parse_model_id("random").trained);
  EXPECT_THROW(parse_model_id("GM-pfcRL1"), ConfigError);
  EXPECT_THROW(parse_model_id("XX-DDQN"), ConfigError);
}

TEST(CellSeed, StableAndSensitiveToEveryField) {
  const auto base = cell_seed(1, "sub001", "PM-DDQN", "T01", "eval");
  EXPECT_EQ(cell_seed(1, "sub001", "PM-DDQN", "T01", "eval"), base);
  EXPECT_NE(cell_seed(2, "sub001", "PM-DDQN", "T01", "eval"), base);
  EXPECT_NE(cell_seed(1, "sub002", "PM-DDQN", "T01", "eval"), base);
  EXPECT_NE(cell_seed(1, "sub001", "GM-DDQN", "T01", "eval"), base);
  EXPECT_NE(cell_seed(1, "sub001", "PM-DDQN", "T02", "eval"), base);
  EXPECT_NE(cell_seed(1, "sub001", "PM-DDQN", "T01", "train"), base);
  // Field boundaries matter: moving a character between fields changes the seed.
  EXPECT_NE(cell_seed(1, "ab", "c", "T01", "eval"), cell_seed(1, "a", "bc", "T01", "eval"));
}

// ---- pool

TEST(ParallelFor, RunsEveryItemOnce) {
  for (int jobs : {1, 2, 8}) {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), jobs, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(ParallelFor, RethrowsLowestFailureAfterFinishing) {
  std::atomic<int> ran{0};
  try {
    parallel_for(40, 4, [&](std::size_t i) {
      ++ran;
      if (i == 31 || i == 7) throw std::runtime_error("item " + std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "item 7");
  }
  EXPECT_EQ(ran.load(), 40);
}

// ---- tables

TEST(Table, NumbersRoundTripAndUndefinedIsNa) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345678.0, 0.0})
    EXPECT_EQ(*parse_number(fmt(v)), v) << fmt(v);
  EXPECT_EQ(fmt(std::nan("")), "NA");
  EXPECT_EQ(fmt(std::optional<double>()), "NA");
  EXPECT_FALSE(parse_number("NA"));
  EXPECT_THROW(parse_number("1.5x"), SchemaError);
}

TEST(Table, CsvRoundTrip) {
  Table t({"a", "b"});
  t.add({"1", "x"});
  t.add({"NA", "y;z"});
  const auto back = Table::parse(t.to_csv());
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.at(1, "b"), "y;z");
  EXPECT_THROW(back.column("c"), SchemaError);
  EXPECT_THROW(t.add({"only one"}), Error);
  EXPECT_THROW(Table::parse("a,b\n1\n"), SchemaError);
}

TEST(FailLabel, FollowsThePointZeroFiveRule) {
  EXPECT_FALSE(fail_label(0.01));
  EXPECT_FALSE(fail_label(0.05));
  EXPECT_TRUE(fail_label(0.0500001));
  EXPECT_TRUE(fail_label(0.9));
  EXPECT_TRUE(fail_label(std::nullopt));
}

// ---- command line

TEST(Cli, ZeroSubjectsIsAValidationError) {
  test::TempDir dir("cli0");
  auto m = tiny(dir / "out", {"random"});
  auto j = m.to_json();
  j["corpus"]["n_subjects"] = 0;
  test::write_file(dir / "m.json", j.dump());
  std::string out;
  EXPECT_EQ(cli("gen --manifest " + (dir / "m.json"), &out), 1);
  EXPECT_NE(out.find("n_subjects"), std::string::npos) << out;
}

TEST(Cli, GenIsReproducible) {
  test::TempDir dir("cligen");
  const auto m = tiny(dir / "out", {"random"});
  m.save(dir / "m.json");
  ASSERT_EQ(cli("gen --manifest " + (dir / "m.json")), 0);
  const auto first = hash_tree(dir / "out/corpus");
  EXPECT_EQ(first.count("sub001.csv"), 1u);
  EXPECT_EQ(first.count("sub002.csv"), 1u);
  ASSERT_EQ(cli("gen --manifest " + (dir / "m.json")), 0);
  EXPECT_EQ(hash_tree(dir / "out/corpus"), first);
  EXPECT_EQ(cli("validate " + (dir / "out/corpus/sub001.csv") + " --task " + (dir / "out/corpus/tasks/sub001.json")), 0);
}

TEST(Cli, TrainBatteryReportAndResume) {
  test::TempDir dir("clirun");
  const auto m = tiny(dir / "out", {"random", "PM-pfcRL1", "PM-DDQN"});
  m.save(dir / "m.json");
  const std::string man = " --manifest " + (dir / "m.json");
  ASSERT_EQ(cli("gen" + man), 0);
  std::string out;
  ASSERT_EQ(cli("train" + man, &out), 0) << out;
  // Two subjects times two PM models; the random control needs no bundle.
  EXPECT_EQ(count_bundles(dir / "out/models"), 4);
  EXPECT_FALSE(fs::exists(dir / "out/models/random"));
  EXPECT_NE(out.find("0 GM + 4 PM"), std::string::npos) << out;
  const auto bundles = hash_tree(dir / "out/models");

  ASSERT_EQ(cli("train --resume" + man, &out), 0);
  EXPECT_NE(out.find("0 trained, 4 already complete"), std::string::npos) << out;
  EXPECT_EQ(hash_tree(dir / "out/models"), bundles);

  // An interrupted bundle (no manifest yet) is retrained on resume.
  fs::remove(dir / "out/models/PM-DDQN/sub002/manifest.json");
  ASSERT_EQ(cli("train --resume" + man, &out), 0);
  EXPECT_NE(out.find("1 trained, 3 already complete"), std::string::npos) << out;
  EXPECT_EQ(hash_tree(dir / "out/models"), bundles);

  // A missing bundle becomes a skipped cell.
  fs::remove_all(dir / "out/models/PM-pfcRL1/sub001");
  ASSERT_EQ(cli("battery" + man, &out), 0) << out;
  EXPECT_NE(out.find("10 evaluations, 2 skipped"), std::string::npos) << out;
  const auto skipped = Table::read(dir / "out/reports/skipped.csv");
  ASSERT_EQ(skipped.rows.size(), 1u);
  EXPECT_EQ(skipped.at(0, "model_id"), "PM-pfcRL1");
  EXPECT_EQ(skipped.at(0, "subject_id"), "sub001");

  ASSERT_EQ(cli("report --out " + (dir / "out"), &out), 0) << out;
  const auto plane = Table::read(dir / "out/figures/mi_plane.csv");
  EXPECT_EQ(plane.rows.size(), 10u);  // one per evaluated (task, model, subject)
  const auto grid = Table::read(dir / "out/figures/reward_grid.csv");
  EXPECT_EQ(grid.rows.size(), 2u);
  EXPECT_EQ(grid.header.size(), 1u + 2 * 3);
  for (std::size_t r = 0; r < grid.rows.size(); ++r) EXPECT_EQ(grid.at(r, "random_fail"), "FAIL");
  const auto tt = Table::read(dir / "out/reports/ttests.csv");
  for (std::size_t r = 0; r < tt.rows.size(); ++r)
    EXPECT_EQ(tt.at(r, "fail") == "1", fail_label(parse_number(tt.at(r, "p"))));
}

TEST(Cli, ReportOnEmptyDirectoryFails) {
  test::TempDir dir("cliempty");
  EXPECT_NE(cli("report --out " + dir.str()), 0);
  EXPECT_EQ(cli("report"), 1);
}

TEST(Cli, UsageErrorsAndSuite) {
  EXPECT_EQ(cli(""), 1);
  EXPECT_EQ(cli("frobnicate"), 1);
  EXPECT_EQ(cli("gen --jobs 0"), 1);
  EXPECT_EQ(cli("--help"), 0);
  test::TempDir dir("clisuite");
  ASSERT_EQ(cli("suite --out " + dir.str()), 0);
  for (const auto& spec : env::canonical_suite())
    EXPECT_EQ(test::slurp(dir / (spec.id + ".json")),
              test::slurp(std::string(MDTLAB_DATA_DIR) + "/tasks/" + spec.id + ".json"));
}

TEST(Cli, ValidateReportsBadFiles) {
  test::TempDir dir("clival");
  auto ds = test::play(env::original_task(30), test::coin_policy);
  ds.records[4].s3 = ds.records[4].s2;
  data::save_dataset(ds, dir / "bad.csv");
  std::string out;
  EXPECT_EQ(cli("validate " + (dir / "bad.csv"), &out), 1);
  EXPECT_NE(out.find("stage mismatch"), std::string::npos) << out;
  test::write_file(dir / "junk.csv", "hello\n");
  EXPECT_EQ(cli("validate " + (dir / "junk.csv")), 1);
}
