#include "apa/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "apa/adherence.hpp"
#include "apa/resample.hpp"
#include "apa/rng.hpp"

namespace apa {
namespace {

constexpr double kFrameSeconds = 0.030;
constexpr double kToleranceSeconds = 0.010;
constexpr int kCoarseStride = 4;
constexpr int kResampleZeroCrossings = 8;

// Partial sums in independent lanes so the loop vectorizes.
double dot(const float* a, const float* b, long n) {
  float acc[8] = {};
  long i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
  }
  for (; i < n; ++i) acc[0] += a[i] * b[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

}  // namespace

std::vector<float> wsola_stretch(std::span<const float> x, std::size_t out_len, int sample_rate) {
  const long frame = std::max(4L, 2 * (std::lround(kFrameSeconds * sample_rate) / 2));
  const long hop = frame / 2;
  const long tolerance = std::lround(kToleranceSeconds * sample_rate);
  const auto n_in = static_cast<long>(x.size());
  const auto n_out = static_cast<long>(out_len);
  if (n_in == 0 || n_out == 0) return std::vector<float>(out_len, 0.0f);

  // Zero-padded copy so every candidate frame can be read without bounds checks.
  const long pad = frame + tolerance + hop;
  std::vector<float> src(static_cast<std::size_t>(n_in + 2 * pad), 0.0f);
  std::copy(x.begin(), x.end(), src.begin() + pad);
  const float* base = src.data() + pad;

  std::vector<float> window(static_cast<std::size_t>(frame));
  for (long i = 0; i < frame; ++i) {
    window[static_cast<std::size_t>(i)] =
        static_cast<float>(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / frame));
  }

  std::vector<double> out(static_cast<std::size_t>(n_out + frame), 0.0);
  std::vector<double> weight(out.size(), 0.0);
  const double rate = static_cast<double>(n_in) / static_cast<double>(n_out);  // input per output

  long prev = 0;
  for (long m = 0; m * hop < n_out; ++m) {
    const long out_pos = m * hop;
    const long nominal = std::lround(static_cast<double>(out_pos) * rate);
    long pos = nominal;
    if (m > 0) {
      // Natural continuation of the previous frame, matched over the overlap.
      const float* target = base + prev + hop;
      const long lo = std::max(nominal - tolerance, -pad + 1);
      const long hi = std::min(nominal + tolerance, n_in + pad - frame - 1);
      double best = -std::numeric_limits<double>::infinity();
      long best_pos = nominal;
      for (long c = lo; c <= hi; c += kCoarseStride) {
        const double s = dot(base + c, target, frame - hop);
        if (s > best) best = s, best_pos = c;
      }
      const long center = best_pos;
      best = -std::numeric_limits<double>::infinity();
      for (long c = std::max(lo, center - kCoarseStride + 1);
           c <= std::min(hi, center + kCoarseStride - 1); ++c) {
        const double s = dot(base + c, target, frame - hop);
        if (s > best) best = s, best_pos = c;
      }
      pos = best_pos;
    }
    for (long i = 0; i < frame; ++i) {
      const double w = window[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(out_pos + i)] += w * base[pos + i];
      weight[static_cast<std::size_t>(out_pos + i)] += w;
    }
    prev = pos;
  }

  std::vector<float> y(out_len);
  for (long i = 0; i < n_out; ++i) {
    const double w = weight[static_cast<std::size_t>(i)];
    y[static_cast<std::size_t>(i)] =
        static_cast<float>(w > 1e-3 ? out[static_cast<std::size_t>(i)] / w : 0.0);
  }
  return y;
}

AudioWindow pitch_shift(const AudioWindow& stem, double semitones, double max_semitones) {
  if (!std::isfinite(semitones) || std::fabs(semitones) > max_semitones) {
    throw ConfigError("pitch shift of " + std::to_string(semitones) + " semitones exceeds the cap of " +
                      std::to_string(max_semitones));
  }
  if (!all_finite(stem.samples)) throw DataError("pitch_shift: non-finite samples");
  if (semitones == 0.0 || stem.samples.empty()) return stem;

  const double factor = std::pow(2.0, semitones / 12.0);
  const auto squeezed_len = static_cast<std::size_t>(
      std::max(1L, std::lround(static_cast<double>(stem.size()) / factor)));
  const std::vector<float> squeezed =
      resample_by_step(stem.samples, factor, squeezed_len, kResampleZeroCrossings);
  return AudioWindow{wsola_stretch(squeezed, stem.size(), stem.sample_rate), stem.sample_rate};
}

AudioWindow time_shift(const AudioWindow& stem, double shift_seconds) {
  if (!std::isfinite(shift_seconds) || std::fabs(shift_seconds) >= stem.seconds()) {
    throw ConfigError("time shift of " + std::to_string(shift_seconds) +
                      " s is not shorter than the window");
  }
  const auto n = static_cast<long>(stem.size());
  const long k = std::lround(shift_seconds * stem.sample_rate);
  if (k == 0) return stem;
  const long r = ((k % n) + n) % n;
  AudioWindow out{std::vector<float>(stem.size()), stem.sample_rate};
  std::rotate_copy(stem.samples.begin(), stem.samples.end() - r, stem.samples.end(),
                   out.samples.begin());
  return out;
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::None: return "none";
    case Condition::Random: return "random";
    case Condition::Pitch: return "pitch";
    case Condition::Time: return "time";
    case Condition::PitchTime: return "pitch_time";
  }
  return "none";
}

Condition parse_condition(std::string_view name) {
  if (name == "none") return Condition::None;
  if (name == "random" || name == "random_pairing") return Condition::Random;
  if (name == "pitch") return Condition::Pitch;
  if (name == "time") return Condition::Time;
  if (name == "pitch_time") return Condition::PitchTime;
  throw ConfigError("unknown condition '" + std::string(name) +
                    "' (expected none, random, pitch, time or pitch_time)");
}

PairSet apply_condition(const PairSet& x, Condition condition, uint64_t seed,
                        const PerturbationRanges& ranges) {
  if (x.size() == 0) throw DataError("apply_condition: empty pair set");
  if (condition == Condition::Random) return make_nonmatching(x, seed);

  std::vector<PairEntry> entries = x.entries();
  if (condition == Condition::None) return x.with_entries(std::move(entries));

  const bool pitch = condition == Condition::Pitch || condition == Condition::PitchTime;
  const bool time = condition == Condition::Time || condition == Condition::PitchTime;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Rng rng(derive_seed(seed, "perturb", i));
    Perturbation& p = entries[i].perturbation;
    p.tag = to_string(condition);
    if (pitch) {
      Rng r = rng.split("pitch");
      const double sign = r.coin() ? 1.0 : -1.0;
      p.semitones = sign * static_cast<double>(r.uniform_int(ranges.min_semitones, ranges.max_semitones));
    }
    if (time) {
      Rng r = rng.split("time");
      const double sign = r.coin() ? 1.0 : -1.0;
      p.shift_seconds = sign * r.uniform(ranges.min_shift_seconds, ranges.max_shift_seconds);
    }
  }
  return x.with_entries(std::move(entries));
}

}  // namespace apa
