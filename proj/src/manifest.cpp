#include "apa/manifest.hpp"

#include <fstream>

#include "apa/wav.hpp"

namespace apa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr const char* kFormat = "apa-pairs-v1";

json perturbation_json(const Perturbation& p) {
  return json{{"tag", p.tag}, {"semitones", p.semitones}, {"shift_seconds", p.shift_seconds}};
}
}  // namespace

json pairset_to_json(const PairSet& pairs) {
  const PairSetInfo& info = pairs.info();
  json bases = json::array();
  for (const BasePair& b : pairs.bases()) {
    bases.push_back(json{{"project", b.project_id},
                         {"project_index", b.project_index},
                         {"offset_seconds", b.offset_seconds},
                         {"offset_samples", b.offset_samples},
                         {"target", b.target_name},
                         {"target_index", b.target_stem},
                         {"prompt", b.prompt_names},
                         {"prompt_indices", b.prompt_stems}});
  }
  json entries = json::array();
  for (const PairEntry& e : pairs.entries()) {
    entries.push_back(json{{"prompt", e.prompt_origin},
                           {"stem", e.stem_origin},
                           {"perturbation", perturbation_json(e.perturbation)}});
  }
  return json{{"format", kFormat},
              {"collection", info.collection},
              {"sample_rate", info.sample_rate},
              {"window_seconds", info.window_seconds},
              {"hop_seconds", info.hop_seconds},
              {"seed", info.seed},
              {"mix", {{"gain", info.mix.gain}, {"peak_normalize", info.mix.peak_normalize}}},
              {"sampled_with_replacement", info.sampled_with_replacement},
              {"bases", std::move(bases)},
              {"entries", std::move(entries)}};
}

void write_window_cache(const PairSet& pairs, const fs::path& dir) {
  fs::create_directories(dir);
  // Materialize base windows through identity entries.
  std::vector<PairEntry> identity(pairs.bases().size());
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = PairEntry{i, i, {}};
  const PairSet base = pairs.with_entries(std::move(identity));
  for (std::size_t i = 0; i < base.size(); ++i) {
    write_wav(CachedWindowSource::prompt_path(dir, i), base.prompt(i).samples, base.info().sample_rate);
    write_wav(CachedWindowSource::stem_path(dir, i), base.stem(i).samples, base.info().sample_rate);
  }
}

void write_manifest(const PairSet& pairs, const fs::path& manifest, const fs::path& window_dir) {
  json j = pairset_to_json(pairs);
  const fs::path parent = fs::absolute(manifest).parent_path();
  std::error_code ec;
  fs::path rel = fs::relative(fs::absolute(window_dir), parent, ec);
  j["window_cache"] = (ec || rel.empty() ? fs::absolute(window_dir) : rel).generic_string();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest: " + manifest.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing manifest: " + manifest.string());
}

PairSet read_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DataError("cannot open manifest: " + manifest.string());
  json j;
  try {
    in >> j;
    if (j.at("format").get<std::string>() != kFormat) {
      throw DataError("unsupported manifest format in " + manifest.string());
    }
    PairSetInfo info;
    info.collection = j.at("collection").get<std::string>();
    info.sample_rate = j.at("sample_rate").get<int>();
    info.window_seconds = j.at("window_seconds").get<double>();
    info.hop_seconds = j.at("hop_seconds").get<double>();
    info.seed = j.at("seed").get<uint64_t>();
    info.mix.gain = j.at("mix").at("gain").get<double>();
    info.mix.peak_normalize = j.at("mix").at("peak_normalize").get<bool>();
    info.sampled_with_replacement = j.value("sampled_with_replacement", false);

    auto bases = std::make_shared<std::vector<BasePair>>();
    for (const auto& b : j.at("bases")) {
      BasePair bp;
      bp.project_id = b.at("project").get<std::string>();
      bp.project_index = b.at("project_index").get<std::size_t>();
      bp.offset_seconds = b.at("offset_seconds").get<double>();
      bp.offset_samples = b.at("offset_samples").get<std::size_t>();
      bp.target_name = b.at("target").get<std::string>();
      bp.target_stem = b.at("target_index").get<std::size_t>();
      bp.prompt_names = b.at("prompt").get<std::vector<std::string>>();
      bp.prompt_stems = b.at("prompt_indices").get<std::vector<std::size_t>>();
      bases->push_back(std::move(bp));
    }
    std::vector<PairEntry> entries;
    for (const auto& e : j.at("entries")) {
      PairEntry pe;
      pe.prompt_origin = e.at("prompt").get<std::size_t>();
      pe.stem_origin = e.at("stem").get<std::size_t>();
      const auto& p = e.at("perturbation");
      pe.perturbation.tag = p.at("tag").get<std::string>();
      pe.perturbation.semitones = p.at("semitones").get<double>();
      pe.perturbation.shift_seconds = p.at("shift_seconds").get<double>();
      entries.push_back(std::move(pe));
    }
    fs::path cache = j.at("window_cache").get<std::string>();
    if (cache.is_relative()) cache = fs::absolute(manifest).parent_path() / cache;
    auto source = std::make_shared<CachedWindowSource>(cache, info.sample_rate);
    return PairSet(std::move(source), std::move(bases), std::move(entries), std::move(info));
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + manifest.string() + ": " + e.what());
  }
}

}  // namespace apa
