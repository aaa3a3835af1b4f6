#include "apa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "apa/parallel.hpp"
#include "apa/perturb.hpp"
#include "apa/resample.hpp"
#include "apa/rng.hpp"
#include "apa/wav.hpp"

namespace apa {

namespace fs = std::filesystem;

Project load_project(std::string id, const std::vector<fs::path>& files, int sample_rate) {
  if (files.empty()) throw DataError("project '" + id + "' has no audio files");
  Project p;
  p.id = std::move(id);
  p.sample_rate = sample_rate;
  std::size_t longest = 0;
  for (const auto& f : files) {
    WavData wav = read_wav(f);
    if (wav.frames() == 0) throw DataError("zero-length audio: " + f.string());
    std::vector<float> mono = wav.downmix();
    if (wav.sample_rate != sample_rate) mono = resample(mono, wav.sample_rate, sample_rate);
    longest = std::max(longest, mono.size());
    p.stems.push_back(Stem{f.stem().string(), std::move(mono)});
  }
  for (auto& s : p.stems) s.samples.resize(longest, 0.0f);
  return p;
}

Collection load_collection(const fs::path& dir, int sample_rate) {
  if (!fs::is_directory(dir)) throw DataError("collection path not found: " + dir.string());
  std::vector<fs::path> project_dirs;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) project_dirs.push_back(e.path());
  }
  std::sort(project_dirs.begin(), project_dirs.end());

  Collection c;
  c.name = dir.filename().string();
  if (c.name.empty()) c.name = dir.parent_path().filename().string();
  for (const auto& pd : project_dirs) {
    std::vector<fs::path> wavs;
    for (const auto& e : fs::directory_iterator(pd)) {
      if (e.is_regular_file() && (e.path().extension() == ".wav" || e.path().extension() == ".WAV")) {
        wavs.push_back(e.path());
      }
    }
    if (wavs.empty()) continue;
    std::sort(wavs.begin(), wavs.end());
    c.projects.push_back(
        std::make_shared<const Project>(load_project(pd.filename().string(), wavs, sample_rate)));
  }
  if (c.projects.empty()) throw DataError("collection has no projects with WAV stems: " + dir.string());
  return c;
}

CollectionSplit split_collection(const Collection& c, double reference_fraction, uint64_t seed) {
  if (!(reference_fraction > 0.0 && reference_fraction < 1.0)) {
    throw ConfigError("reference fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = c.projects.size();
  const auto n_ref = static_cast<std::size_t>(std::llround(reference_fraction * static_cast<double>(n)));
  if (n_ref == 0 || n_ref == n) {
    throw DataError("collection '" + c.name + "' has too few projects (" + std::to_string(n) +
                    ") to split into reference and candidate sets");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "split/" + c.name));
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_index(i + 1)]);
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_ref));
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(n_ref), order.end());

  CollectionSplit s;
  s.reference.name = c.name;
  s.candidate.name = c.name;
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_ref ? s.reference : s.candidate).projects.push_back(c.projects[order[i]]);
  }
  return s;
}

CollectionSplit split_collection(const Collection& c, const std::vector<std::string>& reference_ids,
                                 const std::vector<std::string>& candidate_ids) {
  auto pick = [&](const std::vector<std::string>& ids, Collection& out) {
    out.name = c.name;
    for (const auto& id : ids) {
      auto it = std::find_if(c.projects.begin(), c.projects.end(),
                             [&](const auto& p) { return p->id == id; });
      if (it == c.projects.end()) {
        throw ConfigError("split names unknown project '" + id + "' in collection '" + c.name + "'");
      }
      out.projects.push_back(*it);
    }
  };
  for (const auto& id : reference_ids) {
    if (std::find(candidate_ids.begin(), candidate_ids.end(), id) != candidate_ids.end()) {
      throw ConfigError("project '" + id + "' appears on both sides of the split");
    }
  }
  CollectionSplit s;
  pick(reference_ids, s.reference);
  pick(candidate_ids, s.candidate);
  if (s.reference.projects.empty() || s.candidate.projects.empty()) {
    throw ConfigError("split of collection '" + c.name + "' leaves one side empty");
  }
  return s;
}

bool is_silent(std::span<const float> stem, int sample_rate, double center_seconds,
               double threshold_db, double frame_seconds) {
  const auto frame = static_cast<long>(std::llround(frame_seconds * sample_rate));
  const long center = std::llround(center_seconds * sample_rate);
  const long start = center - frame / 2;
  const auto n = static_cast<long>(stem.size());
  double acc = 0.0;
  for (long i = std::max(0L, start); i < std::min(n, start + frame); ++i) {
    const double v = stem[static_cast<std::size_t>(i)];
    acc += v * v;
  }
  const double level = std::sqrt(acc / static_cast<double>(std::max(1L, frame)));
  return level < std::pow(10.0, threshold_db / 20.0);
}

AudioWindow mix_stems(std::span<const AudioWindow> stems, const MixPolicy& policy) {
  if (stems.empty()) throw DataError("mix_stems: no stems");
  std::vector<std::span<const float>> parts;
  parts.reserve(stems.size());
  for (const auto& s : stems) {
    if (s.sample_rate != stems.front().sample_rate) throw DataError("mix_stems: sample rates differ");
    parts.emplace_back(s.samples);
  }
  return AudioWindow{mix(parts, policy), stems.front().sample_rate};
}

EligibleGrid eligible_windows(const Collection& c, const SamplingOptions& o) {
  if (!(o.window_seconds > 0.0) || !(o.hop_seconds > 0.0)) {
    throw ConfigError("window and hop lengths must be positive");
  }
  EligibleGrid grid;
  for (std::size_t p = 0; p < c.projects.size(); ++p) {
    const Project& proj = *c.projects[p];
    if (proj.stems.size() < 2) {
      throw DataError("project '" + proj.id + "' has fewer than 2 stems");
    }
    const double duration = proj.seconds();
    for (std::size_t k = 0;; ++k) {
      const double offset = static_cast<double>(k) * o.hop_seconds;
      if (offset + o.window_seconds > duration + 1e-9) break;
      ++grid.grid_positions;
      const double center = offset + o.window_seconds / 2.0;
      WindowSlot slot{p, k, {}};
      for (std::size_t s = 0; s < proj.stems.size(); ++s) {
        if (!is_silent(proj.stems[s].samples, proj.sample_rate, center, o.silence_threshold_db,
                       o.silence_frame_seconds)) {
          slot.active_stems.push_back(s);
        }
      }
      if (slot.active_stems.size() >= 2) grid.slots.push_back(std::move(slot));
    }
  }
  return grid;
}

InsufficientWindowsError::InsufficientWindowsError(std::size_t requested, std::size_t eligible)
    : DataError("insufficient eligible windows: requested " + std::to_string(requested) +
                ", eligible " + std::to_string(eligible) + ", shortfall " +
                std::to_string(requested - eligible)),
      requested_(requested), eligible_(eligible) {}

CollectionWindowSource::CollectionWindowSource(std::shared_ptr<const Collection> collection,
                                               std::shared_ptr<const std::vector<BasePair>> bases,
                                               std::size_t window_samples, MixPolicy mix)
    : collection_(std::move(collection)), bases_(std::move(bases)),
      window_samples_(window_samples), mix_(mix) {}

AudioWindow CollectionWindowSource::prompt(std::size_t origin) const {
  const BasePair& b = bases_->at(origin);
  const Project& p = *collection_->projects.at(b.project_index);
  std::vector<std::span<const float>> parts;
  for (std::size_t s : b.prompt_stems) {
    parts.emplace_back(p.stems.at(s).samples.data() + b.offset_samples, window_samples_);
  }
  return AudioWindow{mix(parts, mix_), p.sample_rate};
}

AudioWindow CollectionWindowSource::stem(std::size_t origin) const {
  const BasePair& b = bases_->at(origin);
  const Project& p = *collection_->projects.at(b.project_index);
  const auto& src = p.stems.at(b.target_stem).samples;
  const auto first = src.begin() + static_cast<std::ptrdiff_t>(b.offset_samples);
  return AudioWindow{std::vector<float>(first, first + static_cast<std::ptrdiff_t>(window_samples_)),
                     p.sample_rate};
}

CachedWindowSource::CachedWindowSource(fs::path dir, int sample_rate)
    : dir_(std::move(dir)), sample_rate_(sample_rate) {}

fs::path CachedWindowSource::prompt_path(const fs::path& dir, std::size_t origin) {
  char name[32];
  std::snprintf(name, sizeof name, "prompt_%06zu.wav", origin);
  return dir / name;
}

fs::path CachedWindowSource::stem_path(const fs::path& dir, std::size_t origin) {
  char name[32];
  std::snprintf(name, sizeof name, "stem_%06zu.wav", origin);
  return dir / name;
}

AudioWindow CachedWindowSource::read(const fs::path& p) const {
  WavData wav = read_wav(p);
  std::vector<float> mono = wav.downmix();
  if (wav.sample_rate != sample_rate_) mono = resample(mono, wav.sample_rate, sample_rate_);
  return AudioWindow{std::move(mono), sample_rate_};
}

AudioWindow CachedWindowSource::prompt(std::size_t origin) const {
  return read(prompt_path(dir_, origin));
}

AudioWindow CachedWindowSource::stem(std::size_t origin) const {
  return read(stem_path(dir_, origin));
}

PairSet::PairSet(std::shared_ptr<const WindowSource> source,
                 std::shared_ptr<const std::vector<BasePair>> bases, std::vector<PairEntry> entries,
                 PairSetInfo info)
    : source_(std::move(source)), bases_(std::move(bases)), entries_(std::move(entries)),
      info_(std::move(info)) {
  for (const auto& e : entries_) {
    if (e.prompt_origin >= bases_->size() || e.stem_origin >= bases_->size()) {
      throw DataError("pair entry refers to a missing base pair");
    }
  }
}

std::size_t PairSet::window_samples() const {
  return window_length(info_.window_seconds, info_.sample_rate);
}

AudioWindow PairSet::prompt(std::size_t i) const { return source_->prompt(entries_.at(i).prompt_origin); }

AudioWindow PairSet::stem(std::size_t i) const {
  const PairEntry& e = entries_.at(i);
  AudioWindow w = source_->stem(e.stem_origin);
  if (e.perturbation.semitones != 0.0) w = pitch_shift(w, e.perturbation.semitones);
  if (e.perturbation.shift_seconds != 0.0) w = time_shift(w, e.perturbation.shift_seconds);
  return w;
}

PairSet PairSet::with_entries(std::vector<PairEntry> entries) const {
  return PairSet(source_, bases_, std::move(entries), info_);
}

MemoryWindowSource::MemoryWindowSource(std::vector<AudioWindow> prompts, std::vector<AudioWindow> stems)
    : prompts_(std::move(prompts)), stems_(std::move(stems)) {
  if (prompts_.size() != stems_.size()) throw DataError("window source: prompt/stem count mismatch");
}

PairSet PairSet::materialized() const {
  const std::size_t n = bases_->size();
  std::vector<AudioWindow> prompts(n), stems(n);
  parallel_for(n, [&](std::size_t i) {
    prompts[i] = source_->prompt(i);
    stems[i] = source_->stem(i);
  });
  auto source = std::make_shared<MemoryWindowSource>(std::move(prompts), std::move(stems));
  return PairSet(std::move(source), bases_, entries_, info_);
}

PairSet sample_pairs(std::shared_ptr<const Collection> collection, const SamplingOptions& o,
                     uint64_t seed) {
  if (!collection) throw DataError("sample_pairs: no collection");
  if (o.n_windows == 0) throw ConfigError("n_windows must be at least 1");
  const EligibleGrid grid = eligible_windows(*collection, o);
  const std::size_t eligible = grid.slots.size();
  if (eligible == 0) throw DataError("no eligible windows in collection '" + collection->name + "'");
  if (eligible < o.n_windows && !o.allow_replacement) {
    throw InsufficientWindowsError(o.n_windows, eligible);
  }

  // Window order: a seeded shuffle of the grid, then uniform draws with
  // replacement once the grid is exhausted.
  Rng order_rng(derive_seed(seed, "windows"));
  std::vector<std::size_t> order(eligible);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = eligible - 1; i > 0; --i) {
    std::swap(order[i], order[order_rng.uniform_index(i + 1)]);
  }
  std::vector<std::size_t> picks(order.begin(),
                                 order.begin() + static_cast<std::ptrdiff_t>(std::min(eligible, o.n_windows)));
  while (picks.size() < o.n_windows) picks.push_back(order_rng.uniform_index(eligible));

  const int rate = collection->projects.front()->sample_rate;
  const std::size_t window_samples = window_length(o.window_seconds, rate);
  const std::size_t hop_samples = window_length(o.hop_seconds, rate);

  auto bases = std::make_shared<std::vector<BasePair>>();
  bases->reserve(picks.size());
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const WindowSlot& slot = grid.slots[picks[i]];
    const Project& proj = *collection->projects[slot.project_index];
    if (proj.sample_rate != rate) throw DataError("projects in a collection must share a sample rate");
    Rng rng(derive_seed(seed, "pair", i));

    std::vector<std::size_t> active = slot.active_stems;
    const std::size_t t = rng.uniform_index(active.size());
    BasePair b;
    b.project_index = slot.project_index;
    b.project_id = proj.id;
    b.offset_samples = slot.offset_index * hop_samples;
    b.offset_seconds = static_cast<double>(slot.offset_index) * o.hop_seconds;
    b.target_stem = active[t];
    b.target_name = proj.stems[b.target_stem].name;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(t));

    // Uniform non-empty subset of the remaining active stems.
    const std::size_t m = active.size();
    std::vector<bool> chosen(m, false);
    if (m < 63) {
      const uint64_t mask = 1 + rng.uniform_index((uint64_t{1} << m) - 1);
      for (std::size_t j = 0; j < m; ++j) chosen[j] = ((mask >> j) & 1u) != 0;
    } else {
      bool any = false;
      while (!any) {
        for (std::size_t j = 0; j < m; ++j) any |= (chosen[j] = rng.coin());
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (!chosen[j]) continue;
      b.prompt_stems.push_back(active[j]);
      b.prompt_names.push_back(proj.stems[active[j]].name);
    }
    bases->push_back(std::move(b));
  }

  std::vector<PairEntry> entries(bases->size());
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i] = PairEntry{i, i, {}};

  PairSetInfo info;
  info.collection = collection->name;
  info.sample_rate = rate;
  info.window_seconds = o.window_seconds;
  info.hop_seconds = o.hop_seconds;
  info.seed = seed;
  info.mix = o.mix;
  info.sampled_with_replacement = o.n_windows > eligible;

  auto source = std::make_shared<CollectionWindowSource>(collection, bases, window_samples, o.mix);
  return PairSet(std::move(source), std::move(bases), std::move(entries), std::move(info));
}

}  // namespace apa
