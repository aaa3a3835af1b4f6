#include "apa/audio.hpp"

#include <algorithm>
#include <cmath>

#include "apa/error.hpp"

namespace apa {

std::size_t window_length(double seconds, int sample_rate) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

float peak(std::span<const float> x) {
  float p = 0.0f;
  for (float v : x) p = std::max(p, std::fabs(v));
  return p;
}

double rms(std::span<const float> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (float v : x) acc += static_cast<double>(v) * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

bool all_finite(std::span<const float> x) {
  return std::all_of(x.begin(), x.end(), [](float v) { return std::isfinite(v); });
}

std::vector<float> mix(std::span<const std::span<const float>> parts, const MixPolicy& policy) {
  if (parts.empty()) throw DataError("mix: no inputs");
  const std::size_t n = parts.front().size();
  for (const auto& p : parts) {
    if (p.size() != n) throw DataError("mix: input lengths differ");
  }

  std::vector<float> out(n, 0.0f);
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < n; ++i) out[i] += p[i];
  }
  if (policy.gain != 1.0) {
    const auto g = static_cast<float>(policy.gain);
    for (float& v : out) v *= g;
  }
  if (policy.peak_normalize) {
    const float pk = peak(out);
    if (pk > 1.0f) {
      for (float& v : out) v /= pk;
    }
  }
  return out;
}

AudioWindow mix(const AudioWindow& a, const AudioWindow& b, const MixPolicy& policy) {
  if (a.sample_rate != b.sample_rate) throw DataError("mix: sample rates differ");
  const std::span<const float> parts[] = {a.samples, b.samples};
  return AudioWindow{mix(parts, policy), a.sample_rate};
}

}  // namespace apa
