#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "apa/dataset.hpp"

namespace apa {

/// Musical and timbral traits shared by the projects of one synthetic
/// collection. Each project draws its own key, mode, tempo and chord
/// progression; the style fixes the ranges and the instrument sounds.
struct SynthStyle {
  double tempo_min = 90.0;
  double tempo_max = 110.0;
  int beats_per_chord = 4;
  /// Harmonic amplitudes fall off as rolloff^(h-1).
  double rolloff = 0.5;
  int harmonics = 5;
  /// Added to every stem's register, in semitones.
  int transpose = 0;
  /// Arpeggio notes per beat.
  int arp_division = 2;
  /// Probability that the lead rests for a whole two-bar phrase.
  double lead_phrase_rest = 0.3;
};

/// Named presets: "a" (moderate tempo, bright, chord per bar) and
/// "b" (faster, mellow, chord per half bar, triplet arpeggios).
SynthStyle synth_style(std::string_view name);

struct SynthOptions {
  std::string name = "synth";
  std::size_t n_projects = 20;
  double seconds = 60.0;
  int sample_rate = kPipelineSampleRate;
  std::string style_name = "a";
  SynthStyle style;
  uint64_t seed = 0;
};

/// Four harmonic stems per project: bass, pad, arp, lead.
/// Deterministic given the options.
Project synthesize_project(const std::string& id, const SynthOptions& options, uint64_t seed);
Collection synthesize_collection(const SynthOptions& options);

/// Writes `dir/<project>/<stem>.wav` (float32), the layout load_collection reads.
void write_collection(const Collection& c, const std::filesystem::path& dir);

}  // namespace apa
