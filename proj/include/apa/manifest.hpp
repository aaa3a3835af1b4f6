#pragma once

#include <filesystem>

#include <json.hpp>

#include "apa/dataset.hpp"

namespace apa {

/// JSON form of a PairSet's provenance (format `apa-pairs-v1`).
nlohmann::json pairset_to_json(const PairSet& pairs);

/// Writes the base windows of a set as float32 WAVs into `dir`.
void write_window_cache(const PairSet& pairs, const std::filesystem::path& dir);

/// Writes the manifest. `window_dir` is recorded relative to the manifest
/// location when possible.
void write_manifest(const PairSet& pairs, const std::filesystem::path& manifest,
                    const std::filesystem::path& window_dir);

/// Reads a manifest; audio comes from its window cache directory.
PairSet read_manifest(const std::filesystem::path& manifest);

}  // namespace apa
