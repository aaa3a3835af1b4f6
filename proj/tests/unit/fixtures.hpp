#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "apa/dataset.hpp"
#include "apa/embedding.hpp"
#include "apa/rng.hpp"

namespace apa::testing {

inline AudioWindow tone(double hz, std::size_t n, double amp = 0.3, double phase = 0.0) {
  AudioWindow w;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = static_cast<float>(
        amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / kPipelineSampleRate + phase));
  }
  return w;
}

/// n pairs of tones in memory: prompt i at 200 + 37 i Hz, stem i at 900 + 53 i Hz.
inline PairSet tone_pairs(std::size_t n, std::size_t samples = 16000) {
  std::vector<AudioWindow> prompts, stems;
  auto bases = std::make_shared<std::vector<BasePair>>();
  std::vector<PairEntry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    prompts.push_back(tone(200.0 + 37.0 * static_cast<double>(i), samples));
    stems.push_back(tone(900.0 + 53.0 * static_cast<double>(i), samples, 0.2, 0.3));
    BasePair b;
    b.project_index = i;
    b.project_id = "p" + std::to_string(i);
    b.target_name = "stem";
    b.prompt_stems = {1};
    b.prompt_names = {"other"};
    bases->push_back(b);
    entries.push_back({i, i, {}});
  }
  PairSetInfo info;
  info.collection = "tones";
  info.window_seconds = static_cast<double>(samples) / kPipelineSampleRate;
  return PairSet(std::make_shared<MemoryWindowSource>(prompts, stems), bases, entries, info);
}

inline Eigen::MatrixXd gaussian_rows(std::size_t n, std::size_t d, uint64_t seed, double shift = 0.0) {
  Rng rng(seed);
  Eigen::MatrixXd m(static_cast<long>(n), static_cast<long>(d));
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      // Box-Muller on the platform-independent uniforms.
      const double u1 = 1.0 - rng.uniform01();
      const double u2 = rng.uniform01();
      m(i, j) = shift + std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
  }
  return m;
}

}  // namespace apa::testing
