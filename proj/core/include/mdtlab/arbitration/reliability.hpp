#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

namespace mdtlab::arbitration {

enum class PeCategory : std::uint8_t { kNegative = 0, kZero = 1, kPositive = 2 };

// Zero iff |pe| <= threshold (closed interval); otherwise the sign category.
PeCategory categorize_pe(double pe, double threshold);

// Reliability as the posterior mean probability of the "zero" PE category
// under a symmetric Dirichlet prior, with exponentially forgotten counts.
class ThresholdReliability {
 public:
  ThresholdReliability(double threshold = 0.1, double forgetting = 0.9, double prior_count = 1.0);

  // Decays the counts by the forgetting factor, adds the new PE's category and
  // returns the updated reliability.
  double update(double pe);
  double reliability() const;

  const std::array<double, 3>& counts() const { return counts_; }
  void set_counts(const std::array<double, 3>& c) { counts_ = c; }
  double threshold() const { return threshold_; }

 private:
  double threshold_;
  double forgetting_;
  double prior_;
  std::array<double, 3> counts_{0.0, 0.0, 0.0};
};

struct MixtureCluster {
  double weight = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double count = 0.0;
};

struct MixtureOptions {
  double scale = 0.1;         // half-width of the zero band
  int window = 50;
  int truncation = 10;        // maximum number of clusters
  double concentration = 1.0; // DP concentration
};

// Reliability from a Dirichlet-process Gaussian mixture over a sliding window
// of recent PEs. The mixture is refit on every update by a sequential
// variational pass (new clusters opened greedily, at most `truncation`)
// followed by one batch refinement sweep, under a normal-inverse-gamma base
// measure scaled to the zero band. Reliability is the mixture mass that falls
// inside [-scale, scale]; cluster weights are normalized over the window. An
// empty window reports 1/3.
class MixtureReliability {
 public:
  explicit MixtureReliability(MixtureOptions options = {});

  double update(double pe);
  double reliability() const { return reliability_; }

  const std::vector<MixtureCluster>& clusters() const { return clusters_; }
  const std::deque<double>& window() const { return window_; }
  void set_window(const std::vector<double>& pes);
  const MixtureOptions& options() const { return opt_; }

 private:
  void refit();

  MixtureOptions opt_;
  std::deque<double> window_;
  std::vector<MixtureCluster> clusters_;
  double reliability_ = 1.0 / 3.0;
};

// Probability mass of N(mean, variance) inside [-scale, scale].
double band_mass(double mean, double variance, double scale);

}  // namespace mdtlab::arbitration
