#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "apa/audio.hpp"
#include "apa/dataset.hpp"

namespace apa {

/// Shifts pitch by `semitones` while keeping the length: windowed-sinc
/// resampling by 2^(-semitones/12) in length, then WSOLA time-scale
/// restoration (30 ms frames, 50% overlap, +-10 ms similarity search).
/// Zero semitones returns the input unchanged.
/// Throws ConfigError if |semitones| exceeds max_semitones.
AudioWindow pitch_shift(const AudioWindow& stem, double semitones, double max_semitones = 12.0);

/// Circular delay by round(shift_seconds * rate) samples.
/// Throws ConfigError unless |shift_seconds| is shorter than the window.
AudioWindow time_shift(const AudioWindow& stem, double shift_seconds);

/// Time-scale modification to an exact output length (WSOLA).
std::vector<float> wsola_stretch(std::span<const float> x, std::size_t out_len, int sample_rate);

/// Non-matching conditions applied to the stems of a matching set.
enum class Condition { None, Random, Pitch, Time, PitchTime };

std::string to_string(Condition c);
Condition parse_condition(std::string_view name);

/// Parameter ranges for the drawn perturbations.
struct PerturbationRanges {
  int min_semitones = 1;  // integer magnitudes, inclusive
  int max_semitones = 7;
  double min_shift_seconds = 0.2;
  double max_shift_seconds = 2.5;
};

/// Derives a non-matching set from a matching one. `Random` deranges the
/// stems (make_nonmatching); `Pitch` draws a uniform sign and a uniform
/// integer magnitude; `Time` draws a uniform sign and a uniform continuous
/// magnitude; `PitchTime` draws both independently; `None` copies.
/// Prompts are never altered. Deterministic given the seed; each pair uses
/// its own substream. Throws DataError for an empty set.
PairSet apply_condition(const PairSet& x, Condition condition, uint64_t seed,
                        const PerturbationRanges& ranges = {});

}  // namespace apa
