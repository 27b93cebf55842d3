#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace mdtlab {

// Deterministic random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the draws below are implemented here
// because the std distributions are not portable across library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] (inclusive), rejection sampled.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal via Box-Muller; the spare value is cached.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Engine state round trip, for checkpoints.
  std::string serialize() const;
  void deserialize(const std::string& state);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Stable 64-bit combination of a seed with a list of integer and string keys.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);
std::uint64_t hash_string(std::string_view s);

// FNV-1a 64 over raw bytes; stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace mdtlab
