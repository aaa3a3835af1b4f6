#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace apa {

/// Band-limited interpolation with a Kaiser-windowed sinc kernel.
///
/// Output sample k is the input evaluated at fractional position k * step.
/// When step > 1 the kernel cutoff drops to 1/step so the result is
/// anti-aliased. Input outside [0, size) is treated as zero.
std::vector<float> resample_by_step(std::span<const float> x, double step, std::size_t out_len,
                                    int zero_crossings = 16);

/// Rate conversion. Output length is round(size * to_rate / from_rate).
std::vector<float> resample(std::span<const float> x, int from_rate, int to_rate);

}  // namespace apa
