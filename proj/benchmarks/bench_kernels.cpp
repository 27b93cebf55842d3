#include <benchmark/benchmark.h>

#include "mdtlab/analysis/mi.hpp"
#include "mdtlab/arbitration/pfc_agent.hpp"
#include "mdtlab/deep/ddqn_agent.hpp"
#include "mdtlab/env/environment.hpp"
#include "mdtlab/env/suite.hpp"
#include "mdtlab/nn/lstm.hpp"
#include "mdtlab/rl/basic_agents.hpp"
#include "mdtlab/training/likelihood.hpp"
#include "mdtlab/training/session.hpp"

using namespace mdtlab;

// One full trial (two steps) of the original task.
static void BM_EnvironmentTrial(benchmark::State& state) {
  const auto spec = env::original_task(100000, 1);
  env::Environment e(spec);
  int flip = 0;
  for (auto _ : state) {
    (void)e.step((++flip & 1) ? env::Action::kLeft : env::Action::kRight);
    benchmark::DoNotOptimize(e.step(env::Action::kLeft));
    if (!e.advance_trial()) e = env::Environment(spec);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EnvironmentTrial);

// Likelihood of a 400-trial session under the prefrontal arbitration agent.
static void BM_PfcLikelihood(benchmark::State& state) {
  const auto spec = env::original_task(400, 2);
  rl::RandomAgent subject;
  training::SessionOptions opt;
  opt.action_seed = 3;
  const auto ds = training::freeze_and_evaluate(subject, spec, spec.n_trials, opt);
  const arbitration::PfcAgent agent(state.range(0) == 1 ? arbitration::PfcVariant::kThreshold
                                                        : arbitration::PfcVariant::kMixture);
  for (auto _ : state) benchmark::DoNotOptimize(training::episode_likelihood(agent, ds, spec.graph).sum);
  state.SetItemsProcessed(state.iterations() * ds.records.size());
}
BENCHMARK(BM_PfcLikelihood)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

// One double-DQN minibatch update with the default network.
static void BM_DdqnTrainStep(benchmark::State& state) {
  deep::DdqnAgent agent;
  training::SessionOptions opt;
  opt.action_seed = 4;
  auto spec = env::original_task(64, 5);
  training::run_session(agent, spec, opt);  // fills the replay buffer
  for (auto _ : state) benchmark::DoNotOptimize(agent.train_step());
}
BENCHMARK(BM_DdqnTrainStep)->Unit(benchmark::kMicrosecond);

// One recurrent step of the actor-critic network.
static void BM_LstmStep(benchmark::State& state) {
  Rng rng(6);
  const int hidden = static_cast<int>(state.range(0));
  const nn::LstmPolicyNet net(40, hidden, rng);
  nn::Vector x = nn::Vector::Zero(40);
  x(3) = 1.0;
  nn::Vector h = nn::Vector::Zero(hidden), c = nn::Vector::Zero(hidden);
  for (auto _ : state) {
    auto s = net.step(x, h, c);
    h = s.h;
    c = s.c;
    benchmark::DoNotOptimize(s.value);
  }
}
BENCHMARK(BM_LstmStep)->Arg(8)->Arg(48);

// Plug-in mutual information on n symbol pairs.
static void BM_PluginMi(benchmark::State& state) {
  Rng rng(7);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<int> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<int>(rng.uniform_int(0, 63));
    y[i] = rng.bernoulli(0.7) ? x[i] % 2 : static_cast<int>(rng.uniform_int(0, 1));
  }
  for (auto _ : state) benchmark::DoNotOptimize(analysis::plugin_mi(x, y));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_PluginMi)->Arg(400)->Arg(100000);
BENCHMARK_MAIN();
