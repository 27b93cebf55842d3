#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mdtlab/analysis/mi.hpp"
#include "mdtlab/analysis/stats.hpp"
#include "mdtlab/arbitration/arbitrator.hpp"
#include "mdtlab/arbitration/pfc_agent.hpp"
#include "mdtlab/data/generator.hpp"
#include "mdtlab/deep/ddqn_agent.hpp"
#include "mdtlab/deep/meta_agent.hpp"
#include "mdtlab/env/suite.hpp"
#include "mdtlab/rl/basic_agents.hpp"
#include "mdtlab/rl/transition_model.hpp"
#include "mdtlab/training/session.hpp"
#include "mdtlab/training/trainer.hpp"
#include "support.hpp"

using namespace mdtlab;
using env::Action;

namespace {

constexpr int kCases = 200;

std::vector<int> random_symbols(Rng& rng, int n, int alphabet) {
  std::vector<int> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = static_cast<int>(rng.uniform_int(0, alphabet - 1));
  return v;
}

// y depends on x through a random noisy channel, so the MI is non-trivial.
std::vector<int> noisy_copy(Rng& rng, const std::vector<int>& x, int alphabet, double noise) {
  std::vector<int> y = x;
  for (auto& v : y)
    if (rng.bernoulli(noise)) v = static_cast<int>(rng.uniform_int(0, alphabet - 1));
  return y;
}

// Logs every distribution the wrapped agent hands out.
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

std::unique_ptr<rl::Agent> make_agent(const std::string& kind) {
  if (kind == "random") return std::make_unique<rl::RandomAgent>();
  if (kind == "sarsa") return std::make_unique<rl::SarsaAgent>();
  if (kind == "pfc1") return std::make_unique<arbitration::PfcAgent>(arbitration::PfcVariant::kThreshold);
  if (kind == "pfc2") return std::make_unique<arbitration::PfcAgent>(arbitration::PfcVariant::kMixture);
  if (kind == "ddqn") return std::make_unique<deep::DdqnAgent>();
  deep::MetaConfig mc;
  mc.hidden_size = 8;
  return std::make_unique<deep::MetaAgent>(mc);
}

const std::vector<std::string> kKinds = {"random", "sarsa", "pfc1", "pfc2", "ddqn", "meta"};

}  // namespace

// ---- information measures

TEST(MiProperty, SymmetricBoundedAndRelabelInvariant) {
  Rng rng(11);
  for (int c = 0; c < kCases; ++c) {
    const int ax = static_cast<int>(rng.uniform_int(1, 12));
    const int n = static_cast<int>(rng.uniform_int(1, 300));
    const auto x = random_symbols(rng, n, ax);
    const auto y = noisy_copy(rng, x, ax, rng.uniform());
    const double mi = analysis::plugin_mi(x, y);
    EXPECT_NEAR(mi, analysis::plugin_mi(y, x), 1e-12);
    EXPECT_GE(mi, -1e-12);
    EXPECT_LE(mi, std::min(analysis::plugin_entropy(x), analysis::plugin_entropy(y)) + 1e-12);
    EXPECT_LE(analysis::plugin_entropy(x), std::log2(ax) + 1e-12);

    // Any injective relabelling of either variable leaves MI unchanged.
    std::vector<int> perm(static_cast<std::size_t>(ax));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = ax - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(0, i)]);
    auto xr = x;
    for (auto& v : xr) v = perm[v] * 7 + 100;
    EXPECT_NEAR(analysis::plugin_mi(xr, y), mi, 1e-12);
    EXPECT_NEAR(analysis::plugin_mi(xr, y, true), analysis::plugin_mi(x, y, true), 1e-12);
  }
}

TEST(MiProperty, SelfInformationIsEntropy) {
  Rng rng(12);
  for (int c = 0; c < kCases; ++c) {
    const auto x = random_symbols(rng, static_cast<int>(rng.uniform_int(1, 200)), 9);
    EXPECT_NEAR(analysis::plugin_mi(x, x), analysis::plugin_entropy(x), 1e-12);
  }
}

TEST(StatsProperty, PairedTestIsAntisymmetricAndPValuesAreProbabilities) {
  Rng rng(13);
  for (int c = 0; c < kCases; ++c) {
    const int n = static_cast<int>(rng.uniform_int(2, 30));
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = rng.normal(0.3, 1.0);
      b[i] = rng.normal();
    }
    const auto ab = analysis::paired_ttest(a, b);
    const auto ba = analysis::paired_ttest(b, a);
    ASSERT_TRUE(ab && ba);
    EXPECT_NEAR(ab->t, -ba->t, 1e-9 * std::max(1.0, std::abs(ab->t)));
    EXPECT_NEAR(ab->p, ba->p, 1e-12);
    EXPECT_NEAR(ab->p_greater + ba->p_greater, 1.0, 1e-12);
    EXPECT_GE(ab->p, 0.0);
    EXPECT_LE(ab->p, 1.0);
    EXPECT_NEAR(ab->p, 2 * std::min(ab->p_greater, 1 - ab->p_greater), 1e-12);
  }
}

// ---- model-based learner and arbitration

TEST(TransitionModelProperty, RowsStayOnTheSimplex) {
  Rng rng(21);
  for (const auto& graph : {env::tree_graph(), env::ladder_graph()}) {
    for (int c = 0; c < 20; ++c) {
      rl::TransitionModel m(graph, rng.uniform(0.001, 1.0));
      for (int u = 0; u < 300; ++u) {
        int s = graph.root();
        while (graph.stage_of(s) < 3) {
          const Action a = rng.bernoulli(0.5) ? Action::kRight : Action::kLeft;
          const auto& succ = graph.successors(s, a);
          const int next = succ[rng.bernoulli(0.5) ? 1 : 0];
          const double spe = m.update(s, a, next);
          EXPECT_GE(spe, 0.0);
          EXPECT_LE(spe, 1.0);
          double total = 0.0;
          for (const auto& e : m.row(s, a)) {
            EXPECT_GE(e.prob, 0.0);
            EXPECT_LE(e.prob, 1.0);
            total += e.prob;
          }
          EXPECT_NEAR(total, 1.0, 1e-9);
          s = next;
        }
      }
    }
  }
}

TEST(ArbitrationProperty, WeightStaysInUnitInterval) {
  Rng rng(22);
  for (int c = 0; c < kCases; ++c) {
    arbitration::ArbitrationState st;
    st.params = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 40.0), rng.uniform(0.0, 40.0)};
    st.p_mb = rng.uniform();
    for (int t = 0; t < 100; ++t) {
      st = arbitration::arbitration_step(st, rng.uniform(), rng.uniform());
      ASSERT_GE(st.p_mb, 0.0);
      ASSERT_LE(st.p_mb, 1.0);
    }
    const double fp = arbitration::arbitration_fixed_point(st.params, rng.uniform(), rng.uniform());
    if (std::isfinite(fp)) {
      EXPECT_GE(fp, 0.0);
      EXPECT_LE(fp, 1.0);
    }
  }
}

TEST(ArbitrationProperty, CombinedValuesLieBetweenTheControllers) {
  Rng rng(23);
  for (int c = 0; c < kCases; ++c) {
    const double w = rng.uniform();
    const rl::ActionValues mb{rng.normal(), rng.normal()}, mf{rng.normal(), rng.normal()};
    const auto q = arbitration::combine_q(w, mb, mf);
    for (int i = 0; i < 2; ++i) {
      EXPECT_GE(q[i], std::min(mb[i], mf[i]) - 1e-12);
      EXPECT_LE(q[i], std::max(mb[i], mf[i]) + 1e-12);
    }
  }
}

TEST(ArbitrationProperty, PrefrontalTraceStaysBounded) {
  for (auto variant : {arbitration::PfcVariant::kThreshold, arbitration::PfcVariant::kMixture}) {
    for (const auto& spec : env::canonical_suite()) {
      arbitration::PfcAgent agent(variant);
      agent.enable_trace(true);
      auto short_spec = spec;
      short_spec.n_trials = 60;
      training::SessionOptions opt;
      opt.action_seed = 5;
      training::run_session(agent, short_spec, opt);
      ASSERT_FALSE(agent.trace().empty());
      for (const auto& row : agent.trace()) {
        EXPECT_GE(row.w, 0.0);
        EXPECT_LE(row.w, 1.0);
        EXPECT_GE(row.rel_mb, 0.0);
        EXPECT_LE(row.rel_mb, 1.0);
        EXPECT_GE(row.rel_mf, 0.0);
        EXPECT_LE(row.rel_mf, 1.0);
        EXPECT_GE(row.spe, 0.0);
        EXPECT_LE(row.spe, 1.0);
      }
    }
  }
}

// ---- agents and sessions

TEST(AgentProperty, EveryDistributionIsAProbabilityVector) {
  for (const auto& kind : kKinds) {
    for (const auto& spec : env::canonical_suite()) {
      std::vector<rl::ActionDist> log;
      Recorder agent(make_agent(kind), &log);
      auto short_spec = spec;
      short_spec.n_trials = 30;
      training::SessionOptions opt;
      opt.action_seed = 9;
      training::run_session(agent, short_spec, opt);
      ASSERT_EQ(log.size(), 60u) << kind << " " << spec.id;
      for (const auto& d : log) {
        EXPECT_GE(d[0], 0.0) << kind;
        EXPECT_GE(d[1], 0.0) << kind;
        EXPECT_NEAR(d[0] + d[1], 1.0, 1e-9) << kind << " " << spec.id;
      }
    }
  }
}

TEST(SessionProperty, RecordedSessionsValidateAgainstTheirTask) {
  for (const auto& kind : kKinds) {
    for (const auto& spec : env::canonical_suite()) {
      auto short_spec = spec;
      short_spec.n_trials = 50;
      auto agent = make_agent(kind);
      training::SessionOptions opt;
      opt.action_seed = 4;
      const auto ds = training::freeze_and_evaluate(*agent, short_spec, 50, opt);
      const auto report = data::validate_against_task(ds, short_spec);
      EXPECT_TRUE(report.ok()) << kind << " " << spec.id << ": " << report.summary();
      EXPECT_EQ(data::from_csv(data::to_csv(ds)).records.size(), ds.records.size());
      EXPECT_EQ(data::dataset_hash(data::from_csv(data::to_csv(ds))), data::dataset_hash(ds));
    }
  }
}

TEST(SessionProperty, EnvironmentTrialsEndAtTerminalsWithBoundedReward) {
  Rng rng(31);
  for (const auto& spec : env::canonical_suite()) {
    const auto ds = test::play(spec, test::coin_policy, rng.next_u64());
    EXPECT_EQ(static_cast<int>(ds.records.size()), spec.n_trials);
    const double cap = spec.graph.max_token();
    for (const auto& r : ds.records) {
      EXPECT_GE(spec.graph.terminal_index(r.s3), 0);
      EXPECT_GE(r.reward, 0.0);
      EXPECT_LE(r.reward, cap);
      const auto& d = spec.dynamics;
      switch (d.kind) {
        case env::DynamicsKind::kFixed:
          EXPECT_EQ(r.p_transition, d.fixed_p);
          break;
        case env::DynamicsKind::kSwitch:
          EXPECT_TRUE(r.p_transition == d.switch_low_p || r.p_transition == d.switch_high_p);
          break;
        case env::DynamicsKind::kDrift:
          EXPECT_GE(r.p_transition, d.drift_lo);
          EXPECT_LE(r.p_transition, d.drift_hi);
          break;
        case env::DynamicsKind::kDriftSwitch:
          EXPECT_GE(r.p_transition, std::min({d.drift_lo, d.switch_low_p, d.switch_high_p}));
          EXPECT_LE(r.p_transition, std::max({d.drift_hi, d.switch_low_p, d.switch_high_p}));
          break;
      }
    }
  }
}

TEST(PmRewardProperty, BoundedByKPlusMinusN) {
  Rng rng(32);
  for (int c = 0; c < kCases; ++c) {
    const double k = rng.uniform(0.0, 20.0), n = rng.uniform(0.0, 20.0);
    auto coin = [&] { return rng.bernoulli(0.5) ? Action::kRight : Action::kLeft; };
    const double r = training::pm_terminal_reward(coin(), coin(), coin(), coin(), k, n);
    EXPECT_TRUE(r == k - n || r == k || r == k + n);
  }
}

// ---- determinism

TEST(TrainingProperty, SameSeedGivesIdenticalCheckpoints) {
  training::TrainingConfig cfg;
  cfg.epochs = 2;
  cfg.games_min = 20;
  cfg.games_max = 30;
  cfg.fit_restarts = 1;
  cfg.fit_sweeps = 1;
  cfg.fit_line_evals = 4;
  data::SubjectGeneratorConfig g;
  g.n_subjects = 1;
  g.session_length = 40;
  g.master_seed = 6;
  const auto subject = data::generate_subjects(g).front();
  const auto task = env::original_task(40);

  for (const auto& kind : {"ddqn", "meta"}) {
    cfg.regime = training::Regime::kGM;
    cfg.seed = 17;
    const auto a = training::train_gm(make_agent(kind), task, cfg);
    const auto b = training::train_gm(make_agent(kind), task, cfg);
    EXPECT_EQ(a.agent->checkpoint().dump(), b.agent->checkpoint().dump()) << kind;
    cfg.seed = 18;
    const auto c = training::train_gm(make_agent(kind), task, cfg);
    EXPECT_NE(a.agent->checkpoint().dump(), c.agent->checkpoint().dump()) << kind;
  }
  for (const auto& kind : {"ddqn", "meta", "pfc1", "pfc2"}) {
    cfg.regime = training::Regime::kPM;
    cfg.seed = 19;
    const auto a = training::train_pm(make_agent(kind), subject.dataset, subject.task, cfg);
    const auto b = training::train_pm(make_agent(kind), subject.dataset, subject.task, cfg);
    EXPECT_EQ(a.agent->checkpoint().dump(), b.agent->checkpoint().dump()) << kind;
    EXPECT_EQ(training::curve_csv(a.curve), training::curve_csv(b.curve)) << kind;
  }
}
