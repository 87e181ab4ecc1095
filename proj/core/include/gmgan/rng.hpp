#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace gmgan {

// Deterministic random source. All distributions are derived from raw engine
// draws with fixed arithmetic so that a serialized engine state reproduces
// the exact sample stream on restore (std::normal_distribution caches a
// spare variate, which would be lost across serialization).
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n).
  int64_t uniform_index(int64_t n);

  // Standard normal via Box-Muller; the sine partner is discarded so the
  // generator carries no hidden state.
  double normal();

  // Index distributed per `weights` (assumed non-negative, summing to ~1).
  int categorical(std::span<const double> weights);

  std::string serialize() const;
  void restore(const std::string& state);

 private:
  std::mt19937_64 eng_;
};

// Stable stream splitting: mixes a master seed with a stream tag so that
// sub-experiments (repeats, models, evaluation hooks) get independent,
// reproducible generators.
uint64_t derive_seed(uint64_t master, uint64_t stream);
uint64_t derive_seed(uint64_t master, const std::string& stream);

}  // namespace gmgan
