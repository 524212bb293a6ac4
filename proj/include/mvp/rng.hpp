#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mvp {

/// Derives an independent 64-bit seed for a named sub-stream of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);

/// Thin wrapper over a 64-bit Mersenne Twister with the draws the model needs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform(double lo, double hi);
  double normal();
  bool bernoulli(double p);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// The named random streams of one run. Every stream is seeded from the
/// master seed independently, so disabling one consumer never shifts the
/// draws seen by another.
struct RngStreams {
  Rng init;
  Rng shuffle;
  Rng dropout_first;
  Rng dropout_second;
  Rng noise_first;
  Rng noise_second;

  static RngStreams from_seed(std::uint64_t seed);
};

}  // namespace mvp
