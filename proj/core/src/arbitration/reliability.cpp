#include "mdtlab/arbitration/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mdtlab/error.hpp"

namespace mdtlab::arbitration {

PeCategory categorize_pe(double pe, double threshold) {
  if (std::abs(pe) <= threshold) return PeCategory::kZero;
  return pe < 0 ? PeCategory::kNegative : PeCategory::kPositive;
}

ThresholdReliability::ThresholdReliability(double threshold, double forgetting, double prior_count)
    : threshold_(threshold), forgetting_(forgetting), prior_(prior_count) {
  if (!(threshold > 0)) throw ConfigError("PE threshold must be > 0");
  if (forgetting < 0 || forgetting > 1) throw ConfigError("forgetting rate must be in [0,1]");
  if (!(prior_count > 0)) throw ConfigError("Dirichlet pseudo-count must be > 0");
}

double ThresholdReliability::update(double pe) {
  for (auto& c : counts_) c *= forgetting_;
  counts_[static_cast<int>(categorize_pe(pe, threshold_))] += 1.0;
  return reliability();
}

double ThresholdReliability::reliability() const {
  const double total = counts_[0] + counts_[1] + counts_[2];
  return (counts_[1] + prior_) / (total + 3.0 * prior_);
}

double band_mass(double mean, double variance, double scale) {
  const double sd = std::sqrt(std::max(variance, 1e-6));
  auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
  return std::clamp(cdf((scale - mean) / sd) - cdf((-scale - mean) / sd), 0.0, 1.0);
}

namespace {

constexpr double kVarianceFloor = 1e-6;

// Normal-inverse-gamma base measure, scaled so the prior expected cluster
// variance equals scale^2 and new means are broadly spread.
struct Base {
  double m0 = 0.0;
  double kappa0 = 0.01;
  double a0 = 2.0;
  double b0 = 0.01;
};

struct Stats {
  double n = 0.0;
  double sx = 0.0;
  double sxx = 0.0;
};

// Student-t posterior predictive with cached constants.
struct Predictive {
  double mean = 0.0;
  double nu = 1.0;
  double scale2 = 1.0;
  double log_norm = 0.0;

  double logpdf(double x) const {
    const double d = x - mean;
    return log_norm - 0.5 * (nu + 1.0) * std::log1p(d * d / (nu * scale2));
  }
};

struct Posterior {
  double kappa, mean, a, b;
};

Posterior posterior(const Base& base, const Stats& s) {
  const double kappa = base.kappa0 + s.n;
  const double xbar = s.n > 0 ? s.sx / s.n : 0.0;
  const double ss = std::max(0.0, s.sxx - s.n * xbar * xbar);
  const double mean = (base.kappa0 * base.m0 + s.sx) / kappa;
  const double a = base.a0 + 0.5 * s.n;
  const double b = base.b0 + 0.5 * ss + base.kappa0 * s.n * (xbar - base.m0) * (xbar - base.m0) / (2.0 * kappa);
  return {kappa, mean, a, b};
}

Predictive predictive(const Base& base, const Stats& s) {
  const auto post = posterior(base, s);
  Predictive p;
  p.mean = post.mean;
  p.nu = 2.0 * post.a;
  p.scale2 = std::max(post.b * (post.kappa + 1.0) / (post.a * post.kappa), kVarianceFloor);
  p.log_norm = std::lgamma(0.5 * (p.nu + 1.0)) - std::lgamma(0.5 * p.nu) -
               0.5 * std::log(p.nu * std::numbers::pi * p.scale2);
  return p;
}

}  // namespace

MixtureReliability::MixtureReliability(MixtureOptions options) : opt_(options) {
  if (!(opt_.scale > 0)) throw ConfigError("mixture scale must be > 0");
  if (opt_.window < 1) throw ConfigError("mixture window must be >= 1");
  if (opt_.truncation < 1) throw ConfigError("mixture truncation must be >= 1");
  if (!(opt_.concentration > 0)) throw ConfigError("mixture concentration must be > 0");
}

double MixtureReliability::update(double pe) {
  window_.push_back(pe);
  while (static_cast<int>(window_.size()) > opt_.window) window_.pop_front();
  refit();
  return reliability_;
}

void MixtureReliability::set_window(const std::vector<double>& pes) {
  window_.assign(pes.begin(), pes.end());
  while (static_cast<int>(window_.size()) > opt_.window) window_.pop_front();
  refit();
}

void MixtureReliability::refit() {
  clusters_.clear();
  if (window_.empty()) {
    reliability_ = 1.0 / 3.0;
    return;
  }
  Base base;
  base.b0 = opt_.scale * opt_.scale * (base.a0 - 1.0);
  const double log_alpha = std::log(opt_.concentration);
  const Predictive prior_pred = predictive(base, Stats{});

  // Sequential pass: each PE either opens a new cluster (when the DP "new
  // table" option scores highest and room remains) or is split across the
  // existing clusters by responsibility.
  std::vector<Stats> stats;
  std::vector<Predictive> preds;
  std::vector<double> scores;
  for (double x : window_) {
    scores.assign(stats.size(), 0.0);
    double best = -INFINITY;
    for (std::size_t k = 0; k < stats.size(); ++k) {
      scores[k] = std::log(stats[k].n) + preds[k].logpdf(x);
      best = std::max(best, scores[k]);
    }
    const bool room = static_cast<int>(stats.size()) < opt_.truncation;
    const double new_score = log_alpha + prior_pred.logpdf(x);
    if (room && new_score > best) {
      stats.push_back({1.0, x, x * x});
      preds.push_back(predictive(base, stats.back()));
      continue;
    }
    double z = 0.0;
    for (auto& s : scores) z += (s = std::exp(s - best));
    for (std::size_t k = 0; k < stats.size(); ++k) {
      const double r = scores[k] / z;
      stats[k].n += r;
      stats[k].sx += r * x;
      stats[k].sxx += r * x * x;
      preds[k] = predictive(base, stats[k]);
    }
  }

  // One batch refinement sweep with the cluster set fixed.
  const double total = static_cast<double>(window_.size());
  std::vector<Stats> refined(stats.size());
  std::vector<double> resp(stats.size());
  for (double x : window_) {
    double best = -INFINITY;
    for (std::size_t k = 0; k < stats.size(); ++k) {
      resp[k] = std::log(stats[k].n) + preds[k].logpdf(x);
      best = std::max(best, resp[k]);
    }
    double z = 0.0;
    for (auto& r : resp) z += (r = std::exp(r - best));
    for (std::size_t k = 0; k < stats.size(); ++k) {
      const double r = resp[k] / z;
      refined[k].n += r;
      refined[k].sx += r * x;
      refined[k].sxx += r * x * x;
    }
  }

  reliability_ = 0.0;
  for (const auto& s : refined) {
    if (s.n < 1e-9) continue;
    const auto post = posterior(base, s);
    MixtureCluster c;
    c.count = s.n;
    c.weight = s.n / total;
    c.mean = post.mean;
    c.variance = std::max(post.b / (post.a - 1.0), kVarianceFloor);
    reliability_ += c.weight * band_mass(c.mean, c.variance, opt_.scale);
    clusters_.push_back(c);
  }
  reliability_ = std::clamp(reliability_, 0.0, 1.0);
}

}  // namespace mdtlab::arbitration
