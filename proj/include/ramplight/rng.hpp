#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace ramplight {

/// Mixes a base seed with a tag so that independent consumers of one
/// configured seed get uncorrelated streams.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index);

/// Deterministic random stream. Distribution math lives here instead of the
/// std:: distribution classes, whose output is implementation-defined; the
/// raw mt19937_64 sequence is pinned by the standard, so results reproduce
/// across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal via Box-Muller (pairs cached).
  double gaussian();

  double gaussian(double sigma) { return sigma > 0.0 ? sigma * gaussian() : 0.0; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Knuth's product method; fine for the small event counts used here.
  int poisson(double lambda);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ramplight
