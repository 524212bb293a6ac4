#include "mvp/rng.hpp"

namespace mvp {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) {
  // FNV-1a over the stream name, then mixed with the master seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(master) ^ h);
}

double Rng::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(engine_);
}

double Rng::normal() { return normal_(engine_); }

bool Rng::bernoulli(double p) {
  std::bernoulli_distribution dist(p);
  return dist(engine_);
}

RngStreams RngStreams::from_seed(std::uint64_t seed) {
  return RngStreams{
      Rng(derive_seed(seed, "init")),
      Rng(derive_seed(seed, "shuffle")),
      Rng(derive_seed(seed, "dropout-pass-1")),
      Rng(derive_seed(seed, "dropout-pass-2")),
      Rng(derive_seed(seed, "gate-noise-pass-1")),
      Rng(derive_seed(seed, "gate-noise-pass-2")),
  };
}

}  // namespace mvp
