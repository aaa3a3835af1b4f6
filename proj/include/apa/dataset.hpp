#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "apa/audio.hpp"
#include "apa/error.hpp"

namespace apa {

struct Stem {
  std::string name;
  std::vector<float> samples;
};

/// A multitrack project. All stems share the rate and length.
struct Project {
  std::string id;
  int sample_rate = kPipelineSampleRate;
  std::vector<Stem> stems;

  std::size_t length() const { return stems.empty() ? 0 : stems.front().samples.size(); }
  double seconds() const { return static_cast<double>(length()) / sample_rate; }
};

struct Collection {
  std::string name;
  std::vector<std::shared_ptr<const Project>> projects;
};

/// Loads one project from WAV stems: mono downmix (channel mean), resample
/// to `sample_rate`, zero-pad every stem at the tail to the longest one.
/// Throws DataError for an empty file list, unreadable or zero-length audio.
Project load_project(std::string id, const std::vector<std::filesystem::path>& files,
                     int sample_rate = kPipelineSampleRate);

/// Loads `dir/<project>/*.wav`, projects and stems in lexicographic order.
Collection load_collection(const std::filesystem::path& dir, int sample_rate = kPipelineSampleRate);

struct CollectionSplit {
  Collection reference;
  Collection candidate;
};

/// Partitions projects (never windows) at random: round(fraction * size)
/// projects go to the reference side. Deterministic given the seed.
CollectionSplit split_collection(const Collection& c, double reference_fraction, uint64_t seed);

/// Partitions by explicit project ids; unknown ids throw ConfigError.
CollectionSplit split_collection(const Collection& c, const std::vector<std::string>& reference_ids,
                                 const std::vector<std::string>& candidate_ids);

/// True iff the RMS of the frame centred at `center_seconds` is strictly
/// below `threshold_db` dBFS. Samples outside the stem count as zeros.
bool is_silent(std::span<const float> stem, int sample_rate, double center_seconds,
               double threshold_db = -60.0, double frame_seconds = 0.1);

/// Samplewise sum, peak-normalized only if the sum exceeds full scale.
AudioWindow mix_stems(std::span<const AudioWindow> stems, const MixPolicy& policy = {});

struct SamplingOptions {
  std::size_t n_windows = 10000;
  double window_seconds = 5.0;
  double hop_seconds = 1.0;
  double silence_threshold_db = -60.0;
  double silence_frame_seconds = 0.1;
  /// When the eligible grid is smaller than n_windows: error (false) or
  /// continue drawing with replacement (true).
  bool allow_replacement = false;
  MixPolicy mix;
};

/// A grid position with at least two stems non-silent at its centre.
struct WindowSlot {
  std::size_t project_index = 0;
  std::size_t offset_index = 0;
  std::vector<std::size_t> active_stems;
};

struct EligibleGrid {
  std::size_t grid_positions = 0;
  std::vector<WindowSlot> slots;
};

EligibleGrid eligible_windows(const Collection& c, const SamplingOptions& options);

class InsufficientWindowsError : public DataError {
 public:
  InsufficientWindowsError(std::size_t requested, std::size_t eligible);
  std::size_t requested() const { return requested_; }
  std::size_t eligible() const { return eligible_; }
  std::size_t shortfall() const { return requested_ - eligible_; }

 private:
  std::size_t requested_;
  std::size_t eligible_;
};

/// Provenance of one matching (prompt, stem) pair.
struct BasePair {
  std::size_t project_index = 0;
  std::string project_id;
  std::size_t offset_samples = 0;
  double offset_seconds = 0.0;
  std::size_t target_stem = 0;
  std::string target_name;
  std::vector<std::size_t> prompt_stems;
  std::vector<std::string> prompt_names;
};

/// Stem modification recorded on a pair. Pitch is applied before time.
struct Perturbation {
  std::string tag = "none";
  double semitones = 0.0;
  double shift_seconds = 0.0;

  bool operator==(const Perturbation&) const = default;
};

/// One pair of a set: the prompt of base pair `prompt_origin` with the
/// (possibly perturbed) stem of base pair `stem_origin`.
struct PairEntry {
  std::size_t prompt_origin = 0;
  std::size_t stem_origin = 0;
  Perturbation perturbation;

  bool operator==(const PairEntry&) const = default;
};

/// Materializes the audio of base pairs.
class WindowSource {
 public:
  virtual ~WindowSource() = default;
  virtual AudioWindow prompt(std::size_t origin) const = 0;
  virtual AudioWindow stem(std::size_t origin) const = 0;
};

/// Cuts windows out of in-memory projects.
class CollectionWindowSource final : public WindowSource {
 public:
  CollectionWindowSource(std::shared_ptr<const Collection> collection,
                         std::shared_ptr<const std::vector<BasePair>> bases, std::size_t window_samples,
                         MixPolicy mix);
  AudioWindow prompt(std::size_t origin) const override;
  AudioWindow stem(std::size_t origin) const override;

 private:
  std::shared_ptr<const Collection> collection_;
  std::shared_ptr<const std::vector<BasePair>> bases_;
  std::size_t window_samples_;
  MixPolicy mix_;
};

/// Reads windows from a cache directory (`prompt_NNNNNN.wav`, `stem_NNNNNN.wav`).
class CachedWindowSource final : public WindowSource {
 public:
  CachedWindowSource(std::filesystem::path dir, int sample_rate);
  AudioWindow prompt(std::size_t origin) const override;
  AudioWindow stem(std::size_t origin) const override;

  static std::filesystem::path prompt_path(const std::filesystem::path& dir, std::size_t origin);
  static std::filesystem::path stem_path(const std::filesystem::path& dir, std::size_t origin);

 private:
  AudioWindow read(const std::filesystem::path& p) const;
  std::filesystem::path dir_;
  int sample_rate_;
};

/// Holds every base window in memory.
class MemoryWindowSource final : public WindowSource {
 public:
  MemoryWindowSource(std::vector<AudioWindow> prompts, std::vector<AudioWindow> stems);
  AudioWindow prompt(std::size_t origin) const override { return prompts_.at(origin); }
  AudioWindow stem(std::size_t origin) const override { return stems_.at(origin); }

 private:
  std::vector<AudioWindow> prompts_;
  std::vector<AudioWindow> stems_;
};

struct PairSetInfo {
  std::string collection;
  int sample_rate = kPipelineSampleRate;
  double window_seconds = 5.0;
  double hop_seconds = 1.0;
  uint64_t seed = 0;
  MixPolicy mix;
  bool sampled_with_replacement = false;
};

/// Ordered (prompt, stem) pairs with provenance. Audio is materialized on
/// demand from the shared window source, so derived sets are cheap.
class PairSet {
 public:
  PairSet(std::shared_ptr<const WindowSource> source,
          std::shared_ptr<const std::vector<BasePair>> bases, std::vector<PairEntry> entries,
          PairSetInfo info);

  std::size_t size() const { return entries_.size(); }
  const std::vector<PairEntry>& entries() const { return entries_; }
  const PairEntry& entry(std::size_t i) const { return entries_.at(i); }
  const std::vector<BasePair>& bases() const { return *bases_; }
  const BasePair& base(std::size_t origin) const { return bases_->at(origin); }
  const PairSetInfo& info() const { return info_; }
  std::size_t window_samples() const;

  AudioWindow prompt(std::size_t i) const;
  /// The pair's stem with its perturbation applied.
  AudioWindow stem(std::size_t i) const;

  /// A set sharing this set's bases and audio source.
  PairSet with_entries(std::vector<PairEntry> entries) const;

  /// The same set backed by a MemoryWindowSource, so that sets derived from
  /// it do not cut and mix the base windows again.
  PairSet materialized() const;

 private:
  std::shared_ptr<const WindowSource> source_;
  std::shared_ptr<const std::vector<BasePair>> bases_;
  std::vector<PairEntry> entries_;
  PairSetInfo info_;
};

/// Samples `n_windows` matching pairs. Windows are drawn uniformly without
/// replacement from the eligible grid (>= 2 stems non-silent at the centre);
/// the target stem is uniform among the active stems; the prompt is the mix
/// of a uniform non-empty subset of the remaining active stems.
/// Throws DataError if no window is eligible, InsufficientWindowsError if
/// the grid is too small and replacement is not allowed.
PairSet sample_pairs(std::shared_ptr<const Collection> collection, const SamplingOptions& options,
                     uint64_t seed);

}  // namespace apa
