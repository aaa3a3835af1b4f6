#include "apa/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "apa/error.hpp"
#include "apa/rng.hpp"
#include "apa/wav.hpp"

namespace apa {
namespace {

constexpr std::array<int, 7> kMajor{0, 2, 4, 5, 7, 9, 11};
constexpr std::array<int, 7> kMinor{0, 2, 3, 5, 7, 8, 10};
constexpr std::size_t kTableSize = 2048;

double midi_to_hz(double m) { return 440.0 * std::pow(2.0, (m - 69.0) / 12.0); }

// Pitch class placed in the octave starting at `floor_midi`.
int place(int pitch_class, int floor_midi) {
  return floor_midi + ((pitch_class - floor_midi) % 12 + 12) % 12;
}

struct Instrument {
  std::vector<float> table;  // one cycle, kTableSize + 1 samples
  double attack = 0.01;
  double decay_tau = 0.5;  // seconds, <= 0 means sustained
  double release = 0.03;
};

Instrument make_instrument(const SynthStyle& style, double highest_hz, int sample_rate,
                           double decay_tau) {
  Instrument inst;
  inst.decay_tau = decay_tau;
  const int max_h = std::max(1, static_cast<int>(0.45 * sample_rate / highest_hz));
  const int harmonics = std::clamp(style.harmonics, 1, max_h);
  inst.table.assign(kTableSize + 1, 0.0f);
  std::vector<double> t(kTableSize, 0.0);
  double a = 1.0;
  for (int h = 1; h <= harmonics; ++h, a *= style.rolloff) {
    for (std::size_t i = 0; i < kTableSize; ++i) {
      t[i] += a * std::sin(2.0 * std::numbers::pi * h * static_cast<double>(i) / kTableSize);
    }
  }
  double pk = 0.0;
  for (double v : t) pk = std::max(pk, std::abs(v));
  for (std::size_t i = 0; i < kTableSize; ++i) inst.table[i] = static_cast<float>(t[i] / pk);
  inst.table[kTableSize] = inst.table[0];
  return inst;
}

void render_note(std::vector<float>& out, const Instrument& inst, double midi, double start_s,
                 double dur_s, double amp, int sample_rate) {
  const auto begin = static_cast<std::size_t>(std::llround(start_s * sample_rate));
  const auto len = static_cast<std::size_t>(std::llround(dur_s * sample_rate));
  if (begin >= out.size() || len == 0) return;
  const std::size_t end = std::min(out.size(), begin + len);
  const double step = midi_to_hz(midi) * kTableSize / sample_rate;
  const double attack_n = inst.attack * sample_rate;
  const double release_n = inst.release * sample_rate;
  const double decay = inst.decay_tau > 0.0 ? std::exp(-1.0 / (inst.decay_tau * sample_rate)) : 1.0;
  double phase = 0.0;
  double env = amp;
  for (std::size_t n = begin; n < end; ++n) {
    const double k = static_cast<double>(n - begin);
    double g = env;
    if (k < attack_n) g *= k / attack_n;
    const double left = static_cast<double>(len) - k;
    if (left < release_n) g *= left / release_n;
    const auto i = static_cast<std::size_t>(phase);
    const double frac = phase - static_cast<double>(i);
    const double s = inst.table[i] + frac * (inst.table[i + 1] - inst.table[i]);
    out[n] += static_cast<float>(g * s);
    phase += step;
    if (phase >= kTableSize) phase -= kTableSize;
    env *= decay;
  }
}

}  // namespace

SynthStyle synth_style(std::string_view name) {
  SynthStyle s;
  if (name == "a") return s;
  if (name == "b") {
    s.tempo_min = 120.0;
    s.tempo_max = 140.0;
    s.beats_per_chord = 2;
    s.rolloff = 0.3;
    s.harmonics = 3;
    s.transpose = 2;
    s.arp_division = 3;
    s.lead_phrase_rest = 0.4;
    return s;
  }
  throw ConfigError("unknown synthetic style '" + std::string(name) + "' (expected a or b)");
}

Project synthesize_project(const std::string& id, const SynthOptions& options, uint64_t seed) {
  const SynthStyle& st = options.style;
  const int sr = options.sample_rate;
  if (options.seconds <= 0.0 || sr <= 0) throw ConfigError("synth: duration and rate must be positive");
  if (st.tempo_min <= 0.0 || st.tempo_max < st.tempo_min || st.beats_per_chord < 1 ||
      st.arp_division < 1) {
    throw ConfigError("synth: invalid style");
  }
  Rng rng(seed);
  const int key = static_cast<int>(rng.uniform_index(12));
  const auto& scale = rng.coin() ? kMinor : kMajor;
  const double beat = 60.0 / rng.uniform(st.tempo_min, st.tempo_max);
  std::array<int, 4> loop{0, 0, 0, 0};
  for (std::size_t c = 1; c < loop.size(); ++c) loop[c] = static_cast<int>(1 + rng.uniform_index(5));

  auto triad = [&](int degree) {
    std::array<int, 3> pcs{};
    for (int k = 0; k < 3; ++k) pcs[k] = (key + scale[(degree + 2 * k) % 7]) % 12;
    return pcs;
  };

  const int tr = st.transpose;
  const Instrument bass = make_instrument(st, midi_to_hz(55 + tr), sr, 0.5);
  const Instrument pad = make_instrument(st, midi_to_hz(67 + tr), sr, 0.0);
  const Instrument arp = make_instrument(st, midi_to_hz(80 + tr), sr, 0.2);
  const Instrument lead = make_instrument(st, midi_to_hz(86 + tr), sr, 0.8);

  const std::size_t n = static_cast<std::size_t>(std::llround(options.seconds * sr));
  std::vector<float> s_bass(n, 0.0f), s_pad(n, 0.0f), s_arp(n, 0.0f), s_lead(n, 0.0f);
  const auto total_beats = static_cast<std::size_t>(options.seconds / beat) + 1;
  const std::size_t chords = total_beats / st.beats_per_chord + 1;

  for (std::size_t c = 0; c < chords; ++c) {
    const auto tones = triad(loop[c % loop.size()]);
    const double t0 = static_cast<double>(c * st.beats_per_chord) * beat;
    for (int pc : tones) {
      render_note(s_pad, pad, place(pc, 55 + tr), t0, st.beats_per_chord * beat * 0.98, 0.12, sr);
    }
    for (int b = 0; b < st.beats_per_chord; ++b) {
      const double tb = t0 + b * beat;
      render_note(s_bass, bass, place(tones[0], 43 + tr), tb, 0.9 * beat, 0.28, sr);
      std::array<int, 4> pattern{place(tones[0], 67 + tr), place(tones[1], 67 + tr),
                                 place(tones[2], 67 + tr), place(tones[0], 67 + tr) + 12};
      std::sort(pattern.begin(), pattern.begin() + 3);
      for (int a = 0; a < st.arp_division; ++a) {
        const std::size_t idx = static_cast<std::size_t>(b * st.arp_division + a) % pattern.size();
        render_note(s_arp, arp, pattern[idx], tb + a * beat / st.arp_division,
                    0.9 * beat / st.arp_division, 0.18, sr);
      }
    }
  }

  // Lead: a scale-degree random walk in two-bar phrases, some phrases silent.
  const std::size_t phrase_beats = 8;
  int degree = static_cast<int>(rng.uniform_index(7));
  for (std::size_t p = 0; p * phrase_beats < total_beats; ++p) {
    if (rng.uniform01() < st.lead_phrase_rest) continue;
    double pos = 0.0;
    while (pos < static_cast<double>(phrase_beats) - 0.25) {
      static constexpr std::array<double, 4> kDur{0.5, 1.0, 1.0, 2.0};
      const double dur = std::min(kDur[rng.uniform_index(kDur.size())], phrase_beats - pos);
      degree = std::clamp(degree + static_cast<int>(rng.uniform_int(-2, 2)), 0, 13);
      if (rng.uniform01() >= 0.2) {
        const int midi = 72 + tr + key + scale[degree % 7] + 12 * (degree / 7) - (key > 5 ? 12 : 0);
        render_note(s_lead, lead, midi, (static_cast<double>(p * phrase_beats) + pos) * beat,
                    dur * beat * 0.95, 0.2, sr);
      }
      pos += dur;
    }
  }

  // Shared break: the last beat of every fourth bar is silent
  // on all stems.
  const std::size_t bar_beats = 4;
  for (std::size_t bar = 3; bar * bar_beats < total_beats; bar += 4) {
    const double from = static_cast<double>(bar * bar_beats + bar_beats - 1) * beat;
    const auto a = static_cast<std::size_t>(std::llround(from * sr));
    const auto b = static_cast<std::size_t>(std::llround((from + beat) * sr));
    const std::size_t ramp = static_cast<std::size_t>(0.005 * sr);
    for (auto* s : {&s_bass, &s_pad, &s_arp, &s_lead}) {
      for (std::size_t i = a; i < std::min(b, n); ++i) {
        double g = 0.0;
        if (i - a < ramp) g = 1.0 - static_cast<double>(i - a) / ramp;
        if (b - i < ramp) g = 1.0 - static_cast<double>(b - i) / ramp;
        (*s)[i] *= static_cast<float>(g);
      }
    }
  }

  Project proj;
  proj.id = id;
  proj.sample_rate = sr;
  proj.stems = {{"bass", std::move(s_bass)}, {"pad", std::move(s_pad)}, {"arp", std::move(s_arp)},
                {"lead", std::move(s_lead)}};
  return proj;
}

Collection synthesize_collection(const SynthOptions& options) {
  if (options.n_projects == 0) throw ConfigError("synth: n_projects must be positive");
  Collection c;
  c.name = options.name;
  for (std::size_t p = 0; p < options.n_projects; ++p) {
    char id[32];
    std::snprintf(id, sizeof id, "song%03zu", p);
    c.projects.push_back(std::make_shared<const Project>(
        synthesize_project(id, options, derive_seed(options.seed, options.name, p))));
  }
  return c;
}

void write_collection(const Collection& c, const std::filesystem::path& dir) {
  for (const auto& p : c.projects) {
    const auto pdir = dir / p->id;
    std::filesystem::create_directories(pdir);
    for (const Stem& s : p->stems) write_wav(pdir / (s.name + ".wav"), s.samples, p->sample_rate);
  }
}

}  // namespace apa
