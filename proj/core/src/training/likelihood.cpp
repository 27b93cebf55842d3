#include "mdtlab/training/likelihood.hpp"

#include <algorithm>
#include <cmath>

#include "mdtlab/error.hpp"

namespace mdtlab::training {

LikelihoodResult episode_likelihood(const rl::Agent& agent, const data::SubjectDataset& ds,
                                    const env::TaskGraph& graph) {
  auto a = agent.clone();
  a->set_frozen(true);
  a->begin_task(graph);
  a->reset_episode();
  LikelihoodResult out;
  out.per_decision.reserve(ds.records.size() * 2);
  auto record = [&](double p) {
    out.per_decision.push_back(p);
    out.sum += p;
    out.log_sum += std::log(std::max(p, 1e-300));
  };
  for (const auto& r : ds.records) {
    const rl::Observation o1{r.s1, r.goal}, o2{r.s2, r.goal};
    record(a->act(o1)[env::index(r.a1)]);
    a->observe({o1, r.a1, 0.0, o2, false});
    record(a->act(o2)[env::index(r.a2)]);
    a->observe({o2, r.a2, r.reward, {r.s3, r.goal}, true});
  }
  if (!out.per_decision.empty()) out.mean = out.sum / static_cast<double>(out.per_decision.size());
  return out;
}

double fit_inverse_temperature(const deep::DdqnAgent& agent, const data::SubjectDataset& ds,
                               double holdout_fraction, double beta_max) {
  if (!(holdout_fraction > 0.0 && holdout_fraction <= 1.0))
    throw ConfigError("holdout_fraction must lie in (0, 1]");
  const int n = ds.n_trials();
  const int first = std::min(n - 1, static_cast<int>(std::floor(n * (1.0 - holdout_fraction))));
  // Q-value gap between the chosen and the other action, per held-out decision.
  std::vector<double> gaps;
  for (int t = std::max(0, first); t < n; ++t) {
    const auto& r = ds.records[t];
    const auto q1 = agent.q_values({r.s1, r.goal});
    const auto q2 = agent.q_values({r.s2, r.goal});
    gaps.push_back(q1[env::index(r.a1)] - q1[1 - env::index(r.a1)]);
    gaps.push_back(q2[env::index(r.a2)] - q2[1 - env::index(r.a2)]);
  }
  // log sigma(beta * gap) summed; concave in beta.
  auto loglik = [&](double beta) {
    double s = 0.0;
    for (double g : gaps) {
      const double z = beta * g;
      s += z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
    }
    return s;
  };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = beta_max;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = loglik(x1), f2 = loglik(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-9 * (1.0 + hi); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = loglik(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = loglik(x1);
    }
  }
  const double beta = 0.5 * (lo + hi);
  return loglik(0.0) >= loglik(beta) ? 0.0 : beta;
}

}  // namespace mdtlab::training
