#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace apa {

/// Mixes a master seed with a stream name into an independent child seed.
/// The mapping is fixed (FNV-1a over the key, then SplitMix64 finalization),
/// so derived streams are identical on every platform.
uint64_t derive_seed(uint64_t master, std::string_view key);
uint64_t derive_seed(uint64_t master, std::string_view key, uint64_t index);

/// Seedable generator with platform-independent output.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The std distributions are not, so all derived draws are
/// implemented here on top of raw 64-bit words.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  uint64_t uniform_index(uint64_t n);

  /// Uniform integer in [lo, hi], inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool coin() { return (next_u64() >> 63) != 0; }

  /// Child generator for a named substream of this generator's seed.
  Rng split(std::string_view key) const { return Rng(derive_seed(seed_, key)); }
  Rng split(std::string_view key, uint64_t index) const {
    return Rng(derive_seed(seed_, key, index));
  }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace apa
