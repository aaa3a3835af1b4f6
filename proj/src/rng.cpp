#include "apa/rng.hpp"

#include <stdexcept>

namespace apa {
namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t fnv1a(std::string_view key) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

uint64_t derive_seed(uint64_t master, std::string_view key) {
  return splitmix64(splitmix64(master) ^ fnv1a(key));
}

uint64_t derive_seed(uint64_t master, std::string_view key, uint64_t index) {
  return splitmix64(derive_seed(master, key) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

uint64_t Rng::uniform_index(uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  // Rejection on the top of the range keeps the draw exactly uniform.
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % n + 1) % n;
  uint64_t x = next_u64();
  while (x > limit) x = next_u64();
  return x % n;
}

int64_t Rng::uniform_int(int64_t lo, int64_t hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: hi < lo");
  const auto span = static_cast<uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<int64_t>(next_u64());
  return lo + static_cast<int64_t>(uniform_index(span));
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

}  // namespace apa
