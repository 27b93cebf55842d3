#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "mdtlab/analysis/behavior.hpp"
#include "mdtlab/arbitration/pfc_agent.hpp"
#include "mdtlab/data/generator.hpp"
#include "mdtlab/deep/ddqn_agent.hpp"
#include "mdtlab/deep/meta_agent.hpp"
#include "mdtlab/env/suite.hpp"
#include "mdtlab/error.hpp"
#include "mdtlab/rl/basic_agents.hpp"
#include "mdtlab/rl/policy.hpp"
#include "mdtlab/training/likelihood.hpp"
#include "mdtlab/training/session.hpp"
#include "mdtlab/training/trainer.hpp"
#include "support.hpp"

using namespace mdtlab;
using namespace mdtlab::training;
using env::Action;

namespace {

constexpr Action L = Action::kLeft, R = Action::kRight;

// Plays back a fixed action list, one entry per act() call.
class ReplayAgent final : public rl::Agent {
 public:
  explicit ReplayAgent(std::vector<Action> script) : script_(std::move(script)) {}
  std::string kind() const override { return "replay"; }
  std::unique_ptr<rl::Agent> clone() const override { return std::make_unique<ReplayAgent>(*this); }
  void begin_task(const env::TaskGraph&) override {}
  void reset_episode() override { next_ = 0; }
  rl::ActionDist act(const rl::Observation&) override {
    return script_.at(next_++) == L ? rl::ActionDist{1.0, 0.0} : rl::ActionDist{0.0, 1.0};
  }
  void observe(const rl::Experience&) override {}
  nlohmann::json checkpoint() const override { return rl::checkpoint_header(kind()); }
  void restore(const nlohmann::json&) override {}
  std::uint64_t learnable_hash() const override { return 0; }

 private:
  std::vector<Action> script_;
  std::size_t next_ = 0;
};

// Wraps an agent and logs every distribution it hands out.
class Recorder final : public rl::Agent {
 public:
  Recorder(std::unique_ptr<rl::Agent> inner, std::vector<rl::ActionDist>* log) : inner_(std::move(inner)), log_(log) {}
  std::string kind() const override { return inner_->kind(); }
  std::unique_ptr<rl::Agent> clone() const override { return std::make_unique<Recorder>(inner_->clone(), log_); }
  void begin_task(const env::TaskGraph& g) override { inner_->begin_task(g); }
  void reset_episode() override { inner_->reset_episode(); }
  rl::ActionDist act(const rl::Observation& o) override {
    log_->push_back(inner_->act(o));
    return log_->back();
  }
  void observe(const rl::Experience& e) override { inner_->observe(e); }
  nlohmann::json checkpoint() const override { return inner_->checkpoint(); }
  void restore(const nlohmann::json& j) override { inner_->restore(j); }
  nlohmann::json fast_state() const override { return inner_->fast_state(); }
  void set_fast_state(const nlohmann::json& j) override { inner_->set_fast_state(j); }
  std::uint64_t learnable_hash() const override { return inner_->learnable_hash(); }

 private:
  std::unique_ptr<rl::Agent> inner_;
  std::vector<rl::ActionDist>* log_;
};

std::vector<std::unique_ptr<rl::Agent>> every_agent_kind() {
  std::vector<std::unique_ptr<rl::Agent>> v;
  v.push_back(std::make_unique<rl::RandomAgent>());
  v.push_back(std::make_unique<rl::SarsaAgent>());
  v.push_back(std::make_unique<arbitration::PfcAgent>(arbitration::PfcVariant::kThreshold));
  v.push_back(std::make_unique<arbitration::PfcAgent>(arbitration::PfcVariant::kMixture));
  v.push_back(std::make_unique<deep::DdqnAgent>());
  deep::MetaConfig mc;
  mc.hidden_size = 8;
  v.push_back(std::make_unique<deep::MetaAgent>(mc));
  return v;
}

TrainingConfig small_pm(int epochs, std::uint64_t seed = 3) {
  TrainingConfig c;
  c.epochs = epochs;
  c.games_min = 200;
  c.games_max = 400;
  c.seed = seed;
  return c;
}

data::GeneratedSubject sarsa_subject(double inv_temp, double alpha, std::uint64_t seed, int index = 0) {
  data::SubjectGeneratorConfig g;
  g.family = "sarsa";
  g.n_subjects = index + 1;
  g.master_seed = seed;
  g.priors["sarsa_alpha"] = {alpha, alpha};
  g.priors["sarsa_inv_temp"] = {inv_temp, inv_temp};
  return data::generate_subjects(g).at(static_cast<std::size_t>(index));
}

bool same_curves(const std::vector<CurveRow>& a, const std::vector<CurveRow>& b) {
  return curve_csv(a) == curve_csv(b);
}

}  // namespace

TEST(PmTerminalReward, MatchMismatchAndPartial) {
  EXPECT_EQ(pm_terminal_reward(L, R, L, R, 10, 10), 20.0);
  EXPECT_EQ(pm_terminal_reward(L, R, R, L, 10, 10), 0.0);
  EXPECT_EQ(pm_terminal_reward(L, R, L, L, 10, 10), 10.0);
}

TEST(PmTerminalReward, AllSixteenActionPairs) {
  for (double k : {10.0, 1.5}) {
    for (double n : {0.0, 10.0, 2.25}) {
      int branches[3] = {0, 0, 0};
      for (Action a1 : {L, R})
        for (Action a2 : {L, R})
          for (Action h1 : {L, R})
            for (Action h2 : {L, R}) {
              const int matches = (a1 == h1) + (a2 == h2);
              ++branches[matches];
              EXPECT_EQ(pm_terminal_reward(a1, a2, h1, h2, k, n), k + n * (matches - 1));
            }
      EXPECT_EQ(branches[0], 4);
      EXPECT_EQ(branches[1], 8);
      EXPECT_EQ(branches[2], 4);
    }
  }
}

TEST(TrainingConfig, RejectsOutOfRangeValues) {
  auto bad = [](auto mutate) {
    TrainingConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), ConfigError);
  };
  bad([](TrainingConfig& c) { c.pm_k = 0.0; });
  bad([](TrainingConfig& c) { c.pm_n = -1.0; });
  bad([](TrainingConfig& c) { c.epochs = -1; });
  bad([](TrainingConfig& c) { c.games_max = c.games_min - 1; });
  bad([](TrainingConfig& c) { c.holdout_fraction = 0.0; });
  EXPECT_THROW(parse_regime("XX"), ConfigError);
}

TEST(TrainingConfig, JsonRoundTrip) {
  TrainingConfig c;
  c.regime = Regime::kGM;
  c.epochs = 17;
  c.pm_n = 3.5;
  c.early_stop = 123.0;
  c.pm_credit = PmCredit::kBootstrap;
  c.seed = 99;
  const auto back = TrainingConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(*back.early_stop, 123.0);
}

TEST(EpisodeLikelihood, RandomAgentIsOneHalfEverywhere) {
  const auto ds = test::play(env::original_task(50), test::coin_policy);
  const auto l = episode_likelihood(rl::RandomAgent(), ds, env::tree_graph());
  ASSERT_EQ(l.per_decision.size(), 100u);
  for (double p : l.per_decision) EXPECT_EQ(p, 0.5);
  EXPECT_DOUBLE_EQ(l.sum, 50.0);
  EXPECT_DOUBLE_EQ(l.mean, 0.5);
  EXPECT_NEAR(l.log_sum, 100 * std::log(0.5), 1e-9);
}

TEST(EpisodeLikelihood, MatchingAgentScoresOne) {
  const auto ds = test::play(env::original_task(60), test::coin_policy);
  std::vector<Action> script;
  for (const auto& r : ds.records) script.insert(script.end(), {r.a1, r.a2});
  const auto l = episode_likelihood(ReplayAgent(script), ds, env::tree_graph());
  for (double p : l.per_decision) EXPECT_EQ(p, 1.0);
  EXPECT_EQ(l.mean, 1.0);
  EXPECT_EQ(l.log_sum, 0.0);
}

TEST(EpisodeLikelihood, FixedTableMatchesHandSoftmax) {
  Rng rng(21);
  rl::SarsaAgent agent({0.5, 1.0, 0.7});
  for (auto& v : agent.q().raw()) v = rng.uniform(-10, 10);
  agent.set_frozen(true);
  const auto ds = test::play(env::original_task(80), test::coin_policy);
  const auto l = episode_likelihood(agent, ds, env::tree_graph());
  std::size_t i = 0;
  for (const auto& r : ds.records) {
    for (auto [s, a] : {std::pair{r.s1, r.a1}, std::pair{r.s2, r.a2}}) {
      const int o = rl::Observation{s, r.goal}.index();
      const double gap = agent.q().get(o, a) - agent.q().get(o, a == L ? R : L);
      EXPECT_NEAR(l.per_decision[i++], 1.0 / (1.0 + std::exp(-0.7 * gap)), 1e-12);
    }
  }
}

TEST(EpisodeLikelihood, DoesNotTouchTheAgent) {
  rl::SarsaAgent agent;
  const auto before = agent.checkpoint().dump();
  const auto ds = test::play(env::original_task(40), test::ideal_policy);
  (void)episode_likelihood(agent, ds, env::tree_graph());
  EXPECT_EQ(agent.checkpoint().dump(), before);
}

TEST(EpisodeLikelihood, ValuesLieInUnitInterval) {
  const auto ds = test::play(env::original_task(100), test::coin_policy);
  for (auto& agent : every_agent_kind()) {
    const auto l = episode_likelihood(*agent, ds, env::tree_graph());
    for (double p : l.per_decision) {
      EXPECT_GT(p, 0.0) << agent->kind();
      EXPECT_LE(p, 1.0) << agent->kind();
    }
  }
}

TEST(InverseTemperature, RecoversGeneratingValue) {
  deep::DdqnConfig cfg;
  cfg.seed = 4;
  deep::DdqnAgent agent(cfg);
  auto ds = test::play(env::original_task(3000), test::coin_policy);
  // Replace choices with softmax draws from the agent's own Q-values.
  const double beta = 40.0;
  Rng rng(5);
  for (auto& r : ds.records) {
    r.a1 = rl::sample_action(rl::softmax_policy(agent.q_values({r.s1, r.goal}), beta), rng);
    r.a2 = rl::sample_action(rl::softmax_policy(agent.q_values({r.s2, r.goal}), beta), rng);
  }
  EXPECT_NEAR(fit_inverse_temperature(agent, ds, 1.0), beta, 0.15 * beta);
}

TEST(InverseTemperature, UninformativeChoicesGiveZero) {
  deep::DdqnAgent agent;
  auto ds = test::play(env::original_task(400), test::coin_policy);
  // Anti-correlated with the Q-values: best beta on [0, inf) is 0.
  for (auto& r : ds.records) {
    const auto q1 = agent.q_values({r.s1, r.goal});
    const auto q2 = agent.q_values({r.s2, r.goal});
    r.a1 = q1[0] > q1[1] ? R : L;
    r.a2 = q2[0] > q2[1] ? R : L;
  }
  EXPECT_EQ(fit_inverse_temperature(agent, ds), 0.0);
}

TEST(CurveCsv, RoundTripKeepsMissingCells) {
  std::vector<CurveRow> rows(3);
  rows[0] = {0, 0.25, std::nan(""), 0.5};
  rows[1] = {1, std::nan(""), 1.0 / 3.0, std::nan("")};
  rows[2] = {2, 1e-300, -7.0, 0.999};
  const auto back = parse_curve_csv(curve_csv(rows));
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(curve_csv(back), curve_csv(rows));
  EXPECT_TRUE(std::isnan(back[1].loss));
  EXPECT_EQ(back[1].mean_reward, 1.0 / 3.0);
  EXPECT_THROW(parse_curve_csv("epoch,loss\n"), SchemaError);
}

TEST(TrainGm, ZeroEpochsLeavesInitialization) {
  deep::DdqnConfig cfg;
  cfg.seed = 8;
  const deep::DdqnAgent init(cfg);
  TrainingConfig tc;
  tc.regime = Regime::kGM;
  tc.epochs = 0;
  auto m = train_gm(std::make_unique<deep::DdqnAgent>(init), env::original_task(), tc);
  EXPECT_EQ(m.agent->checkpoint().dump(), init.checkpoint().dump());
  EXPECT_TRUE(m.curve.empty());
  EXPECT_TRUE(m.frozen);
  EXPECT_TRUE(m.agent->frozen());
}

TEST(TrainGm, SameSeedSameCurveAndWeights) {
  TrainingConfig tc;
  tc.regime = Regime::kGM;
  tc.epochs = 3;
  tc.games_min = 30;
  tc.games_max = 60;
  tc.seed = 12;
  deep::DdqnConfig dc;
  dc.hidden = {16};
  dc.seed = 1;
  auto a = train_gm(std::make_unique<deep::DdqnAgent>(dc), env::original_task(), tc);
  auto b = train_gm(std::make_unique<deep::DdqnAgent>(dc), env::original_task(), tc);
  EXPECT_TRUE(same_curves(a.curve, b.curve));
  EXPECT_EQ(a.agent->checkpoint().dump(), b.agent->checkpoint().dump());
  ASSERT_EQ(a.curve.size(), 3u);
  for (const auto& row : a.curve) EXPECT_FALSE(std::isnan(row.mean_reward));
  tc.seed = 13;
  auto c = train_gm(std::make_unique<deep::DdqnAgent>(dc), env::original_task(), tc);
  EXPECT_FALSE(same_curves(a.curve, c.curve));
}

TEST(TrainGm, FrozenAgentRejected) {
  auto agent = std::make_unique<rl::SarsaAgent>();
  agent->set_frozen(true);
  TrainingConfig tc;
  tc.epochs = 1;
  EXPECT_THROW(train_gm(std::move(agent), env::original_task(), tc), ProtocolError);
}

TEST(TrainPm, TrialCountMismatchIsIngestionError) {
  const auto s = sarsa_subject(1.0, 0.3, 2);
  auto task = s.task;
  task.n_trials = s.dataset.n_trials() - 1;
  task.goal_schedule.clear();
  EXPECT_THROW(train_pm(std::make_unique<rl::SarsaAgent>(), s.dataset, task, small_pm(1)), SchemaError);
  data::SubjectDataset empty = s.dataset;
  empty.records.clear();
  EXPECT_THROW(train_pm(std::make_unique<rl::SarsaAgent>(), empty, s.task, small_pm(1)), SchemaError);
}

TEST(TrainPm, EarlyStopBelowFirstEpochRunsOneEpoch) {
  const auto s = sarsa_subject(1.0, 0.3, 2);
  auto cfg = small_pm(10);
  cfg.early_stop = 0.0;
  const auto m = train_pm(std::make_unique<rl::SarsaAgent>(), s.dataset, s.task, cfg);
  EXPECT_EQ(m.curve.size(), 1u);
  EXPECT_TRUE(m.info.at("early_stopped").get<bool>());
  cfg.early_stop.reset();
  EXPECT_EQ(train_pm(std::make_unique<rl::SarsaAgent>(), s.dataset, s.task, cfg).curve.size(), 10u);
}

TEST(TrainPm, SameSeedSameModel) {
  const auto s = sarsa_subject(1.0, 0.3, 2);
  for (PmCredit credit : {PmCredit::kGameReturn, PmCredit::kBootstrap}) {
    auto cfg = small_pm(4);
    cfg.pm_credit = credit;
    const auto a = train_pm(std::make_unique<rl::SarsaAgent>(), s.dataset, s.task, cfg);
    const auto b = train_pm(std::make_unique<rl::SarsaAgent>(), s.dataset, s.task, cfg);
    EXPECT_TRUE(same_curves(a.curve, b.curve));
    EXPECT_EQ(a.agent->checkpoint().dump(), b.agent->checkpoint().dump());
  }
}

TEST(TrainPm, WithoutMatchBonusHumanActionsAreIgnored) {
  // Both actions reach both successors, so any action sequence is legal here.
  std::vector<env::StateNode> nodes(5);
  nodes[0] = {"S1", 1, {{{1, 2}, {2, 1}}}, 0, env::TokenColor::kNone};
  nodes[1] = {"S2", 2, {{{3, 4}, {4, 3}}}, 0, env::TokenColor::kNone};
  nodes[2] = {"S3", 2, {{{4, 3}, {3, 4}}}, 0, env::TokenColor::kNone};
  nodes[3] = {"S4", 3, {}, 40, env::TokenColor::kRed};
  nodes[4] = {"S5", 3, {}, 10, env::TokenColor::kBlue};
  auto task = env::original_task(300, 5);
  task.graph = env::TaskGraph("mirror", nodes);
  rl::SarsaAgent subject_agent({0.3, 1.0, 1.0});
  const auto subject = run_session(subject_agent, task, {});
  auto scrambled = subject;
  Rng rng(6);
  for (auto& r : scrambled.records) {
    r.a1 = rng.bernoulli(0.5) ? L : R;
    r.a2 = rng.bernoulli(0.5) ? L : R;
  }
  ASSERT_NE(scrambled, subject);
  // n = 0 pays k on every game, so the subject's choices carry no signal.
  auto cfg = small_pm(5);
  cfg.pm_n = 0.0;
  const auto a = train_pm(std::make_unique<rl::SarsaAgent>(), subject, task, cfg);
  const auto b = train_pm(std::make_unique<rl::SarsaAgent>(), scrambled, task, cfg);
  EXPECT_EQ(a.agent->checkpoint().dump(), b.agent->checkpoint().dump());
  for (const auto& row : a.curve) EXPECT_EQ(row.mean_reward, cfg.pm_k);
  for (const auto& row : a.curve) EXPECT_NEAR(row.mean_likelihood, 0.5, 0.05);
}

TEST(TrainPm, SameFamilyTrainingRaisesLikelihood) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = sarsa_subject(1.0, 0.3, seed);
    const rl::SarsaAgent untrained({0.1, 1.0, 0.3});
    const double before = episode_likelihood(untrained, s.dataset, s.task.graph).mean;
    const auto m = train_pm(std::make_unique<rl::SarsaAgent>(untrained), s.dataset, s.task, small_pm(5, seed));
    const double after = episode_likelihood(*m.agent, s.dataset, s.task.graph).mean;
    EXPECT_GT(after, before + 0.1) << "seed " << seed;
    EXPECT_EQ(after, m.curve.back().mean_likelihood);
  }
}

TEST(TrainPm, PfcFitImprovesOnItsStartingPoint) {
  data::SubjectGeneratorConfig g;
  g.n_subjects = 5;
  g.session_length = 200;
  const auto subjects = data::generate_subjects(g);
  for (const auto& s : subjects) {
    const arbitration::PfcAgent start(arbitration::PfcVariant::kThreshold);
    const double before = episode_likelihood(start, s.dataset, s.task.graph).log_sum;
    TrainingConfig cfg;
    cfg.fit_restarts = 1;
    cfg.fit_sweeps = 2;
    const auto m = train_pm(std::make_unique<arbitration::PfcAgent>(start), s.dataset, s.task, cfg);
    const double after = episode_likelihood(*m.agent, s.dataset, s.task.graph).log_sum;
    EXPECT_GT(after, before) << s.dataset.subject_id;
    EXPECT_NEAR(after, m.info.at("log_likelihood").get<double>(), 1e-9);
  }
}

TEST(TrainPm, TabularControlReachesHighLikelihood) {
  double total = 0.0;
  const int n = 5;
  for (int i = 0; i < n; ++i) {
    const auto s = sarsa_subject(1.0, 0.3, 1, i);
    const auto m =
        train_pm(std::make_unique<rl::SarsaAgent>(rl::SarsaParams{0.1, 1.0, 0.3}), s.dataset, s.task, small_pm(20));
    total += m.curve.back().mean_likelihood;
  }
  EXPECT_GE(total / n, 0.7);
}

TEST(TrainPm, RandomAgentCurveIsOneHalf) {
  const auto s = sarsa_subject(1.0, 0.3, 2);
  const auto m = train_pm(std::make_unique<rl::RandomAgent>(), s.dataset, s.task, small_pm(3));
  ASSERT_EQ(m.curve.size(), 1u);
  EXPECT_EQ(m.curve[0].mean_likelihood, 0.5);
}

TEST(TrainedModel, BundleRoundTrip) {
  test::TempDir dir("bundle");
  const auto s = sarsa_subject(1.0, 0.3, 2);
  auto m = train_pm(std::make_unique<rl::SarsaAgent>(), s.dataset, s.task, small_pm(2), "PM-sarsa");
  m.save(dir / "m");
  const auto back = TrainedModel::load(dir / "m");
  EXPECT_EQ(back.model_id, "PM-sarsa");
  EXPECT_TRUE(back.frozen);
  EXPECT_TRUE(back.agent->frozen());
  EXPECT_EQ(back.agent->checkpoint().dump(), m.agent->checkpoint().dump());
  EXPECT_EQ(back.config.to_json(), m.config.to_json());
  EXPECT_TRUE(same_curves(back.curve, m.curve));
  EXPECT_EQ(back.info, m.info);
}

TEST(TrainedModel, TamperedBundleRejected) {
  test::TempDir dir("tamper");
  TrainedModel m;
  m.model_id = "x";
  m.agent = std::make_unique<rl::SarsaAgent>();
  m.save(dir / "m");
  auto text = test::slurp(dir / "m/curve.csv");
  test::write_file(dir / "m/curve.csv", text + "5,1,1,1\n");
  EXPECT_THROW(TrainedModel::load(dir / "m"), SchemaError);
}

TEST(TrainedModel, EveryAgentKindRestoresFromCheckpoint) {
  for (auto& agent : every_agent_kind()) {
    const auto back = agent_from_checkpoint(agent->checkpoint());
    EXPECT_EQ(back->kind(), agent->kind());
    EXPECT_EQ(back->learnable_hash(), agent->learnable_hash()) << agent->kind();
    EXPECT_EQ(back->checkpoint().dump(), agent->checkpoint().dump()) << agent->kind();
  }
  nlohmann::json bad = rl::checkpoint_header("alien");
  EXPECT_THROW(agent_from_checkpoint(bad), SchemaError);
}

TEST(Freezing, LearnableStateHashIsConstantThroughASession) {
  for (auto& agent : every_agent_kind()) {
    // Give SARSA a non-trivial table so a missed freeze would show.
    if (auto* s = dynamic_cast<rl::SarsaAgent*>(agent.get()))
      for (auto& v : s->q().raw()) v = 1.0;
    agent->set_frozen(true);
    const auto hash = agent->learnable_hash();
    SessionOptions opt;
    opt.action_seed = 2;
    (void)run_session(*agent, env::original_task(150, 9), opt);
    EXPECT_EQ(agent->learnable_hash(), hash) << agent->kind();
  }
}

TEST(Freezing, CheckpointUnchangedByEvaluation) {
  const auto s = sarsa_subject(1.0, 0.3, 2);
  const auto m = train_pm(std::make_unique<rl::SarsaAgent>(), s.dataset, s.task, small_pm(2));
  const auto before = m.agent->checkpoint().dump();
  for (const auto& spec : env::canonical_suite()) (void)freeze_and_evaluate(*m.agent, spec, 100, {});
  EXPECT_EQ(m.agent->checkpoint().dump(), before);
}

TEST(Freezing, FrozenDdqnRefusesToTrain) {
  deep::DdqnAgent agent;
  agent.set_frozen(true);
  EXPECT_THROW((void)agent.train_step(), ProtocolError);
  EXPECT_THROW(train_pm(std::make_unique<deep::DdqnAgent>(agent), sarsa_subject(1.0, 0.3, 2).dataset,
                        sarsa_subject(1.0, 0.3, 2).task, small_pm(1)),
               ProtocolError);
}

TEST(Freezing, FullStateModeRemovesCarryOver) {
  std::vector<rl::ActionDist> weights_only, full_state;
  const auto spec = env::original_task(120, 4);
  for (auto* log : {&weights_only, &full_state}) {
    auto pfc = std::make_unique<arbitration::PfcAgent>(arbitration::PfcVariant::kThreshold);
    pfc->set_frozen(true);
    Recorder rec(std::move(pfc), log);
    SessionOptions opt;
    opt.action_seed = 3;
    opt.freeze_mode = log == &full_state ? FreezeMode::kFullState : FreezeMode::kWeightsOnly;
    (void)run_session(rec, spec, opt);
  }
  env::Environment e(spec);
  // Stage-1 choice under full-state freezing depends on the goal alone.
  std::map<int, rl::ActionDist> by_goal;
  bool drifted = false;
  for (int t = 0; t < spec.n_trials; ++t) {
    const int g = env::index(e.goal_at(t));
    const auto d = full_state[2 * t];
    if (!by_goal.count(g)) by_goal[g] = d;
    EXPECT_EQ(by_goal[g], d) << "trial " << t;
    if (weights_only[2 * t] != by_goal[g]) drifted = true;
  }
  EXPECT_TRUE(drifted);
}

TEST(FreezeAndEvaluate, SharedSeedGivesSharedEvents) {
  const auto spec = env::canonical_suite()[4];
  SessionOptions a_opt, b_opt;
  a_opt.action_seed = 1;
  b_opt.action_seed = 2;
  const auto a = freeze_and_evaluate(rl::RandomAgent(), spec, 300, a_opt);
  const auto b = freeze_and_evaluate(arbitration::PfcAgent(arbitration::PfcVariant::kMixture), spec, 300, b_opt);
  int shared = 0;
  for (int t = 0; t < 300; ++t) {
    const auto &ra = a.records[t], &rb = b.records[t];
    EXPECT_EQ(ra.goal, rb.goal);
    EXPECT_EQ(ra.p_transition, rb.p_transition);
    EXPECT_EQ(ra.block, rb.block);
    if (ra.a1 == rb.a1) {
      EXPECT_EQ(ra.s2, rb.s2) << "trial " << t;
      ++shared;
      if (ra.a2 == rb.a2) EXPECT_EQ(ra.s3, rb.s3) << "trial " << t;
    }
  }
  EXPECT_GT(shared, 50);
}

TEST(FreezeAndEvaluate, RandomAgentMatchesAnalyticBaseline) {
  // Expected reward of the coin-flip policy, per trial, divided by the ideal value.
  auto coin_value = [](const env::TaskGraph& g, double p, env::Goal goal) {
    auto token = [&](int s) {
      const auto& n = g.node(s);
      if (goal == env::Goal::kFlexible) return static_cast<double>(n.token_value);
      return static_cast<int>(n.color) == static_cast<int>(goal) ? n.token_value : 0.0;
    };
    double v = 0.0;
    for (Action a1 : {L, R}) {
      const auto& mid = g.successors(g.root(), a1);
      for (int i = 0; i < 2; ++i)
        for (Action a2 : {L, R}) {
          const auto& end = g.successors(mid[i], a2);
          v += 0.25 * (i == 0 ? p : 1 - p) * (p * token(end[0]) + (1 - p) * token(end[1]));
        }
    }
    return v;
  };
  for (int task : {0, 9}) {
    const auto spec = env::canonical_suite()[task];
    const int n = 20000;
    const auto ds = freeze_and_evaluate(rl::RandomAgent(), spec, n, {});
    const auto per = analysis::normalized_reward_per_trial(ds, spec.graph);
    double expect = 0.0, mean = 0.0, sq = 0.0;
    int k = 0;
    for (int t = 0; t < n; ++t) {
      if (std::isnan(per[t])) continue;
      const auto& r = ds.records[t];
      expect += coin_value(spec.graph, r.p_transition, r.goal) / env::ideal_root_value(spec.graph, r.p_transition, r.goal);
      mean += per[t];
      sq += per[t] * per[t];
      ++k;
    }
    expect /= k;
    mean /= k;
    const double se = std::sqrt((sq / k - mean * mean) / k);
    EXPECT_NEAR(mean, expect, 4 * se) << spec.id;
    EXPECT_NEAR(*analysis::normalized_reward(ds, spec.graph), mean, 1e-12);
  }
}
