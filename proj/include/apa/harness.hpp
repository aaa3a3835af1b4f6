#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "apa/dataset.hpp"
#include "apa/fusion.hpp"
#include "apa/metrics.hpp"
#include "apa/perturb.hpp"
#include "apa/projection.hpp"
#include "apa/synth.hpp"

namespace apa {

/// One collection of a run: a directory of WAV projects or a synthetic
/// fixture. Optional explicit reference/candidate project ids replace the
/// random split.
struct CollectionConfig {
  std::string name;
  std::filesystem::path path;
  std::optional<SynthOptions> synthetic;
  std::vector<std::string> reference_ids;
  std::vector<std::string> candidate_ids;
};

struct RunConfig {
  std::vector<CollectionConfig> collections;
  std::size_t n_windows = 500;
  double window_seconds = 5.0;
  double hop_seconds = 1.0;
  double silence_threshold_db = -60.0;
  bool allow_replacement = true;
  double reference_fraction = 0.5;
  /// Use the reference windows themselves as candidates (sanity runs).
  bool candidate_equals_reference = false;
  std::vector<Metric> metrics;
  std::vector<FusionMethod> fusions;
  std::vector<ProjectionSpec> projections;
  std::vector<std::string> embedders{"builtin-logmel"};
  std::vector<Condition> conditions{Condition::Random, Condition::Pitch, Condition::Time,
                                    Condition::PitchTime};
  uint64_t seed = 0;
  std::size_t n_repeats = 5;
  std::size_t n_derangements = 1;
  MixPolicy mix;
  std::filesystem::path output_dir = "out";
  std::size_t threads = 1;

  /// Parses and validates; relative paths resolve against `base_dir`.
  /// Every problem raises ConfigError.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  nlohmann::json to_json() const;
};

RunConfig load_run_config(const std::filesystem::path& path);

/// One row of records.csv. Distances are M_reference(candidate); `pert`
/// columns refer to the non-matching candidate (B' or the perturbed set).
struct Record {
  int experiment = 0;
  std::size_t repeat = 0;
  uint64_t seed = 0;
  std::string embedder;
  std::string fusion;
  std::string projection;
  std::string metric;
  std::string reference;
  std::string candidate;
  std::string grouping;  // within | between
  std::string condition;
  std::optional<double> d_ref_cand;
  std::optional<double> d_refnm_cand;
  std::optional<double> d_ref_pert;
  std::optional<double> d_refnm_pert;
  std::optional<double> score_cand;
  std::optional<double> score_pert;
};

struct SignTestRecord {
  std::string embedder, fusion, projection, metric, grouping, condition;
  std::string quantity;  // "distance" (pert - cand) or "score" (cand - pert)
  std::size_t n = 0;
  std::size_t n_effective = 0;
  std::size_t n_positive = 0;
  double p_value = 1.0;
  int stars = 0;
};

struct ClesRecord {
  std::string embedder, fusion, projection, metric, reference, candidate, condition;
  std::size_t n_perturbed = 0;
  std::size_t n_matching = 0;
  double value = 0.5;
};

struct EvalReport {
  int experiment = 0;
  nlohmann::json config;
  std::vector<Record> records;
  std::vector<SignTestRecord> sign_tests;
  std::vector<ClesRecord> cles;
  /// Split, reference and derangement seeds, per collection.
  nlohmann::json seeds;
  double wall_seconds = 0.0;

  /// Timing is only included on request, so reruns compare equal.
  nlohmann::json to_json(bool include_timing = true) const;
  std::string records_csv() const;
};

EvalReport run_experiment(const RunConfig& cfg, int experiment);
EvalReport run_experiment1(const RunConfig& cfg);
EvalReport run_experiment2(const RunConfig& cfg);
EvalReport run_experiment3(const RunConfig& cfg);

/// Writes `report.json` and `records.csv` into `dir`.
void write_report(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace apa
