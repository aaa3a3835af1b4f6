#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace apa {

/// Default pipeline rate for window audio.
inline constexpr int kPipelineSampleRate = 16000;

/// A mono window of floating point samples in [-1, 1].
struct AudioWindow {
  std::vector<float> samples;
  int sample_rate = kPipelineSampleRate;

  std::size_t size() const { return samples.size(); }
  double seconds() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// How waveforms are combined when mixing.
///
/// The sum is scaled by `gain`; if `peak_normalize` is set and the result
/// peaks above full scale it is divided by its peak.
struct MixPolicy {
  double gain = 1.0;
  bool peak_normalize = true;
};

/// Number of samples in a window of the given duration.
std::size_t window_length(double seconds, int sample_rate);

float peak(std::span<const float> x);
double rms(std::span<const float> x);
bool all_finite(std::span<const float> x);

/// Samplewise sum of equal-length inputs under the given policy.
/// Throws DataError on length mismatch or an empty input list.
std::vector<float> mix(std::span<const std::span<const float>> parts,
                       const MixPolicy& policy = {});

/// Two-input convenience overload; rates must also match.
AudioWindow mix(const AudioWindow& a, const AudioWindow& b, const MixPolicy& policy = {});

}  // namespace apa
