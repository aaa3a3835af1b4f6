#include "apa/harness.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <fftw3.h>

#include "apa/adherence.hpp"
#include "apa/embedding.hpp"
#include "apa/parallel.hpp"
#include "apa/rng.hpp"
#include "apa/stats.hpp"

#ifndef APA_VERSION
#define APA_VERSION "0.0.0"
#endif

namespace apa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T, class Parse>
std::vector<T> parse_axis(const json& j, const char* key, Parse parse, std::optional<std::vector<T>> fallback) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(std::string("config: '") + key + "' is required");
  }
  const json& list = j.at(key);
  if (!list.is_array()) throw ConfigError(std::string("config: '") + key + "' must be a list");
  if (list.empty()) throw ConfigError(std::string("config: '") + key + "' must list at least one entry");
  std::vector<T> out;
  for (const auto& item : list) {
    if (!item.is_string()) throw ConfigError(std::string("config: entries of '") + key + "' must be strings");
    out.push_back(parse(item.get<std::string>()));
  }
  return out;
}

SynthOptions parse_synthetic(const json& j, const std::string& name) {
  require_keys(j, {"style", "n_projects", "seconds", "seed", "sample_rate"}, "synthetic collection '" + name + "'");
  SynthOptions o;
  o.name = name;
  o.style_name = j.value("style", o.style_name);
  o.style = synth_style(o.style_name);
  o.n_projects = j.value("n_projects", o.n_projects);
  o.seconds = j.value("seconds", o.seconds);
  o.seed = j.value("seed", o.seed);
  o.sample_rate = j.value("sample_rate", o.sample_rate);
  if (o.n_projects < 2) throw ConfigError("synthetic collection '" + name + "' needs at least 2 projects");
  return o;
}

CollectionConfig parse_collection(const json& j, const fs::path& base_dir) {
  require_keys(j, {"name", "path", "synthetic", "reference", "candidate"}, "collection entry");
  CollectionConfig c;
  if (!j.contains("name")) throw ConfigError("config: every collection needs a 'name'");
  c.name = j.at("name").get<std::string>();
  if (c.name.empty()) throw ConfigError("config: collection names must be non-empty");
  const bool has_path = j.contains("path");
  const bool has_synth = j.contains("synthetic");
  if (has_path == has_synth) {
    throw ConfigError("collection '" + c.name + "' needs exactly one of 'path' or 'synthetic'");
  }
  if (has_path) {
    c.path = j.at("path").get<std::string>();
    if (c.path.is_relative() && !base_dir.empty()) c.path = base_dir / c.path;
  } else {
    c.synthetic = parse_synthetic(j.at("synthetic"), c.name);
  }
  if (j.contains("reference") != j.contains("candidate")) {
    throw ConfigError("collection '" + c.name + "': give both 'reference' and 'candidate' ids or neither");
  }
  if (j.contains("reference")) {
    c.reference_ids = j.at("reference").get<std::vector<std::string>>();
    c.candidate_ids = j.at("candidate").get<std::vector<std::string>>();
  }
  return c;
}

json synth_to_json(const SynthOptions& o) {
  return json{{"n_projects", o.n_projects},
              {"seconds", o.seconds},
              {"seed", o.seed},
              {"sample_rate", o.sample_rate},
              {"style", o.style_name}};
}

// Fixed-format doubles so records.csv is byte-stable.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Side {
  std::string name;
  std::shared_ptr<const Collection> reference;
  std::shared_ptr<const Collection> candidate;
};

// A reference set embedded and projected under one (fusion, projection).
struct ReferenceModel {
  Projection projection;
  Eigen::MatrixXd x;
  std::vector<Eigen::MatrixXd> x_nm;
  std::optional<FrechetReference> fx;
  std::vector<FrechetReference> fx_nm;
};

struct Candidate {
  Eigen::MatrixXd y;
  std::optional<GaussianStats> stats;
};

Candidate prepare_candidate(const ReferenceModel& m, const EmbeddingMatrix& e, bool need_stats) {
  Candidate c;
  c.y = m.projection.is_identity() ? e.to_double() : m.projection.apply(Eigen::MatrixXd(e.to_double()));
  if (need_stats) c.stats = gaussian_stats(c.y);
  return c;
}

double reference_distance(Metric metric, const Eigen::MatrixXd& x, const FrechetReference* fx,
                          const Candidate& c) {
  if (metric == Metric::Fad) return fx->distance_to(*c.stats);
  return mmd2(x, c.y);
}

struct Distances {
  double d_ref = 0.0;
  double d_nm = 0.0;  // mean over derangements
  double score = 0.0;  // mean over derangements
};

Distances score_candidate(Metric metric, const ReferenceModel& m, const Candidate& c, bool with_nm) {
  Distances d;
  d.d_ref = reference_distance(metric, m.x, m.fx ? &*m.fx : nullptr, c);
  if (!with_nm) return d;
  for (std::size_t k = 0; k < m.x_nm.size(); ++k) {
    const double nm = reference_distance(metric, m.x_nm[k], m.fx_nm.empty() ? nullptr : &m.fx_nm[k], c);
    d.d_nm += nm;
    d.score += adherence_value(d.d_ref, nm);
  }
  d.d_nm /= static_cast<double>(m.x_nm.size());
  d.score /= static_cast<double>(m.x_nm.size());
  return d;
}

EmbeddingMatrix embed_set(const PairSet& set, FusionMethod fusion, const Embedder& embedder,
                          EmbeddingCache& cache) {
  // Mixed windows rarely recur, so only late fusion goes through the cache.
  return fuse_pairs(set, fusion, embedder, fusion == FusionMethod::Mix ? nullptr : &cache);
}

void add_sign_tests(EvalReport& report) {
  using Key = std::tuple<std::string, std::string, std::string, std::string, std::string, std::string>;
  std::map<Key, std::vector<double>> groups;
  std::vector<Key> order;
  for (const Record& r : report.records) {
    Key k{r.embedder, r.fusion, r.projection, r.metric, r.grouping, r.condition};
    double diff;
    if (report.experiment == 1) {
      diff = *r.d_ref_pert - *r.d_ref_cand;
    } else {
      diff = *r.score_cand - *r.score_pert;
    }
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) order.push_back(k);
    it->second.push_back(diff);
  }
  for (const Key& k : order) {
    const std::vector<double>& diffs = groups.at(k);
    SignTestRecord s;
    std::tie(s.embedder, s.fusion, s.projection, s.metric, s.grouping, s.condition) = k;
    s.quantity = report.experiment == 1 ? "distance" : "score";
    s.n = diffs.size();
    bool any_nonzero = false;
    for (double d : diffs) any_nonzero |= d != 0.0;
    if (any_nonzero) {
      const SignTestResult t = sign_test(diffs, Alternative::Greater);
      s.n_effective = t.n_effective;
      s.n_positive = t.n_positive;
      s.p_value = t.p_value;
    }
    s.stars = significance_stars(s.p_value);
    report.sign_tests.push_back(std::move(s));
  }
}

void add_cles(EvalReport& report) {
  using Key = std::tuple<std::string, std::string, std::string, std::string, std::string, std::string, std::string>;
  std::map<Key, std::pair<std::vector<double>, std::vector<double>>> groups;
  std::vector<Key> order;
  for (const Record& r : report.records) {
    Key k{r.embedder, r.fusion, r.projection, r.metric, r.reference, r.candidate, r.condition};
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) order.push_back(k);
    it->second.first.push_back(*r.score_pert);
    it->second.second.push_back(*r.score_cand);
  }
  for (const Key& k : order) {
    const auto& [perturbed, matching] = groups.at(k);
    ClesRecord c;
    std::tie(c.embedder, c.fusion, c.projection, c.metric, c.reference, c.candidate, c.condition) = k;
    c.n_perturbed = perturbed.size();
    c.n_matching = matching.size();
    c.value = cles(perturbed, matching);
    report.cles.push_back(std::move(c));
  }
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
  try {
    require_keys(j,
                 {"collections", "n_windows", "window_seconds", "hop_seconds", "silence_threshold_db",
                  "allow_replacement", "reference_fraction", "candidate_equals_reference", "metrics",
                  "fusions", "projections", "embedders", "conditions", "seed", "n_repeats",
                  "n_derangements", "mix", "output_dir", "threads"},
                 "run config");
    RunConfig c;
    if (!j.contains("collections") || !j.at("collections").is_array() || j.at("collections").empty()) {
      throw ConfigError("config: 'collections' must list at least one collection");
    }
    std::set<std::string> names;
    for (const auto& item : j.at("collections")) {
      c.collections.push_back(parse_collection(item, base_dir));
      if (!names.insert(c.collections.back().name).second) {
        throw ConfigError("config: duplicate collection name '" + c.collections.back().name + "'");
      }
    }
    c.n_windows = j.value("n_windows", c.n_windows);
    c.window_seconds = j.value("window_seconds", c.window_seconds);
    c.hop_seconds = j.value("hop_seconds", c.hop_seconds);
    c.silence_threshold_db = j.value("silence_threshold_db", c.silence_threshold_db);
    c.allow_replacement = j.value("allow_replacement", c.allow_replacement);
    c.reference_fraction = j.value("reference_fraction", c.reference_fraction);
    c.candidate_equals_reference = j.value("candidate_equals_reference", c.candidate_equals_reference);
    c.metrics = parse_axis<Metric>(j, "metrics", parse_metric, std::nullopt);
    c.fusions = parse_axis<FusionMethod>(j, "fusions", parse_fusion, std::nullopt);
    c.projections = parse_axis<ProjectionSpec>(j, "projections", ProjectionSpec::parse, std::nullopt);
    c.embedders = parse_axis<std::string>(
        j, "embedders", [](const std::string& s) { return s; }, c.embedders);
    c.conditions = parse_axis<Condition>(j, "conditions", parse_condition, c.conditions);
    if (!j.contains("seed")) throw ConfigError("config: 'seed' is required");
    c.seed = j.at("seed").get<uint64_t>();
    c.n_repeats = j.value("n_repeats", c.n_repeats);
    c.n_derangements = j.value("n_derangements", c.n_derangements);
    if (j.contains("mix")) {
      require_keys(j.at("mix"), {"gain", "peak_normalize"}, "'mix'");
      c.mix.gain = j.at("mix").value("gain", c.mix.gain);
      c.mix.peak_normalize = j.at("mix").value("peak_normalize", c.mix.peak_normalize);
    }
    if (j.contains("output_dir")) {
      c.output_dir = j.at("output_dir").get<std::string>();
      if (c.output_dir.is_relative() && !base_dir.empty()) c.output_dir = base_dir / c.output_dir;
    }
    c.threads = j.value("threads", c.threads);

    if (c.n_windows < 2) throw ConfigError("config: n_windows must be at least 2");
    if (!(c.window_seconds > 0.0) || !(c.hop_seconds > 0.0)) {
      throw ConfigError("config: window_seconds and hop_seconds must be positive");
    }
    if (!(c.reference_fraction > 0.0 && c.reference_fraction < 1.0)) {
      throw ConfigError("config: reference_fraction must lie strictly between 0 and 1");
    }
    if (c.n_repeats == 0) throw ConfigError("config: n_repeats must be at least 1");
    if (c.n_derangements == 0) throw ConfigError("config: n_derangements must be at least 1");
    if (!(c.mix.gain > 0.0)) throw ConfigError("config: mix gain must be positive");
    for (const std::string& e : c.embedders) {
      if (e != "builtin-logmel" && e != "builtin") {
        throw ConfigError("config: the harness computes only the builtin-logmel embedder, got '" + e +
                          "'; score externally extracted embeddings with the score command");
      }
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json RunConfig::to_json() const {
  json cols = json::array();
  for (const CollectionConfig& c : collections) {
    json e{{"name", c.name}};
    if (c.synthetic) {
      e["synthetic"] = synth_to_json(*c.synthetic);
    } else {
      e["path"] = c.path.generic_string();
    }
    if (!c.reference_ids.empty() || !c.candidate_ids.empty()) {
      e["reference"] = c.reference_ids;
      e["candidate"] = c.candidate_ids;
    }
    cols.push_back(std::move(e));
  }
  auto names = [](const auto& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(to_string(x));
    return a;
  };
  json projs = json::array();
  for (const auto& p : projections) projs.push_back(p.label());
  return json{{"collections", std::move(cols)},
              {"n_windows", n_windows},
              {"window_seconds", window_seconds},
              {"hop_seconds", hop_seconds},
              {"silence_threshold_db", silence_threshold_db},
              {"allow_replacement", allow_replacement},
              {"reference_fraction", reference_fraction},
              {"candidate_equals_reference", candidate_equals_reference},
              {"metrics", names(metrics)},
              {"fusions", names(fusions)},
              {"projections", std::move(projs)},
              {"embedders", embedders},
              {"conditions", names(conditions)},
              {"seed", seed},
              {"n_repeats", n_repeats},
              {"n_derangements", n_derangements},
              {"mix", {{"gain", mix.gain}, {"peak_normalize", mix.peak_normalize}}},
              {"output_dir", output_dir.generic_string()}};
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return RunConfig::from_json(j, path.parent_path());
}

json EvalReport::to_json(bool include_timing) const {
  json recs = json::array();
  for (const Record& r : records) {
    recs.push_back(json{{"repeat", r.repeat},
                        {"seed", r.seed},
                        {"embedder", r.embedder},
                        {"fusion", r.fusion},
                        {"projection", r.projection},
                        {"metric", r.metric},
                        {"reference", r.reference},
                        {"candidate", r.candidate},
                        {"grouping", r.grouping},
                        {"condition", r.condition},
                        {"d_ref_cand", opt_json(r.d_ref_cand)},
                        {"d_refnm_cand", opt_json(r.d_refnm_cand)},
                        {"d_ref_pert", opt_json(r.d_ref_pert)},
                        {"d_refnm_pert", opt_json(r.d_refnm_pert)},
                        {"score_cand", opt_json(r.score_cand)},
                        {"score_pert", opt_json(r.score_pert)}});
  }
  json tests = json::array();
  for (const SignTestRecord& s : sign_tests) {
    tests.push_back(json{{"embedder", s.embedder},
                         {"fusion", s.fusion},
                         {"projection", s.projection},
                         {"metric", s.metric},
                         {"grouping", s.grouping},
                         {"condition", s.condition},
                         {"quantity", s.quantity},
                         {"n", s.n},
                         {"n_effective", s.n_effective},
                         {"n_positive", s.n_positive},
                         {"p_value", s.p_value},
                         {"stars", s.stars}});
  }
  json effect = json::array();
  for (const ClesRecord& c : cles) {
    effect.push_back(json{{"embedder", c.embedder},
                          {"fusion", c.fusion},
                          {"projection", c.projection},
                          {"metric", c.metric},
                          {"reference", c.reference},
                          {"candidate", c.candidate},
                          {"condition", c.condition},
                          {"n_perturbed", c.n_perturbed},
                          {"n_matching", c.n_matching},
                          {"cles", c.value}});
  }
  json meta{{"library", "apa"},
            {"version", APA_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"fftw", std::string(fftw_version)},
            {"pitch_semitones", "integer"},
            {"pitch_shift", "windowed-sinc resampling + WSOLA"}};
  if (include_timing) {
    meta["wall_seconds"] = wall_seconds;
    meta["threads"] = thread_count();
  }
  return json{{"experiment", experiment}, {"config", config},      {"seeds", seeds},
              {"records", std::move(recs)}, {"sign_tests", std::move(tests)},
              {"cles", std::move(effect)},  {"metadata", std::move(meta)}};
}

std::string EvalReport::records_csv() const {
  std::ostringstream out;
  out << "experiment,repeat,seed,embedder,fusion,projection,metric,reference,candidate,grouping,"
         "condition,d_ref_cand,d_refnm_cand,d_ref_pert,d_refnm_pert,score_cand,score_pert\n";
  for (const Record& r : records) {
    out << r.experiment << ',' << r.repeat << ',' << r.seed << ',' << csv_field(r.embedder) << ','
        << csv_field(r.fusion) << ',' << csv_field(r.projection) << ',' << csv_field(r.metric) << ','
        << csv_field(r.reference) << ',' << csv_field(r.candidate) << ',' << r.grouping << ','
        << r.condition << ',' << opt(r.d_ref_cand) << ',' << opt(r.d_refnm_cand) << ','
        << opt(r.d_ref_pert) << ',' << opt(r.d_refnm_pert) << ',' << opt(r.score_cand) << ','
        << opt(r.score_pert) << '\n';
  }
  return out.str();
}

EvalReport run_experiment(const RunConfig& cfg, int experiment) {
  if (experiment < 1 || experiment > 3) throw ConfigError("experiment must be 1, 2 or 3");
  const auto started = std::chrono::steady_clock::now();
  set_thread_count(cfg.threads);

  EvalReport report;
  report.experiment = experiment;
  report.config = cfg.to_json();
  report.seeds = json::array();

  // Experiment 1 compares raw distances and needs no deranged reference.
  const bool need_nm = experiment != 1;
  bool need_stats = false;
  for (Metric m : cfg.metrics) need_stats |= m == Metric::Fad;

  SamplingOptions so;
  so.n_windows = cfg.n_windows;
  so.window_seconds = cfg.window_seconds;
  so.hop_seconds = cfg.hop_seconds;
  so.silence_threshold_db = cfg.silence_threshold_db;
  so.allow_replacement = cfg.allow_replacement;
  so.mix = cfg.mix;

  // Collections, project-level splits, and the reference sets A_i with
  // their derangements A'_i, fixed for the whole run.
  std::vector<Side> sides;
  std::vector<PairSet> refs;
  std::vector<std::vector<PairSet>> refs_nm;
  for (std::size_t c = 0; c < cfg.collections.size(); ++c) {
    const CollectionConfig& cc = cfg.collections[c];
    Collection col = cc.synthetic ? synthesize_collection(*cc.synthetic) : load_collection(cc.path);
    col.name = cc.name;
    const uint64_t split_seed = derive_seed(cfg.seed, "split", c);
    CollectionSplit split = cc.reference_ids.empty()
                                ? split_collection(col, cfg.reference_fraction, split_seed)
                                : split_collection(col, cc.reference_ids, cc.candidate_ids);
    sides.push_back(Side{cc.name, std::make_shared<const Collection>(std::move(split.reference)),
                         std::make_shared<const Collection>(std::move(split.candidate))});

    const uint64_t ref_seed = derive_seed(cfg.seed, "reference", c);
    refs.push_back(sample_pairs(sides.back().reference, so, ref_seed));
    json nm_seeds = json::array();
    refs_nm.emplace_back();
    if (need_nm) {
      for (std::size_t k = 0; k < cfg.n_derangements; ++k) {
        const uint64_t s = derive_seed(cfg.seed, "derangement", c * 1000003 + k);
        refs_nm.back().push_back(make_nonmatching(refs.back(), s));
        nm_seeds.push_back(s);
      }
    }
    json entry{{"collection", cc.name},
               {"split_seed", cc.reference_ids.empty() ? json(split_seed) : json(nullptr)},
               {"reference_seed", ref_seed},
               {"derangement_seeds", std::move(nm_seeds)},
               {"reference_projects", json::array()},
               {"candidate_projects", json::array()},
               {"sampled_with_replacement", refs.back().info().sampled_with_replacement}};
    for (const auto& p : sides.back().reference->projects) entry["reference_projects"].push_back(p->id);
    for (const auto& p : sides.back().candidate->projects) entry["candidate_projects"].push_back(p->id);
    report.seeds.push_back(std::move(entry));
  }
  const std::size_t n_sides = sides.size();

  std::vector<Condition> variants;
  if (experiment == 3) {
    variants = cfg.conditions;
  } else {
    variants = {Condition::Random};
  }

  for (const std::string& embedder_name : cfg.embedders) {
    const std::unique_ptr<Embedder> embedder = make_embedder(embedder_name);
    const std::string emb_id = embedder->spec().backend_id;

    // models[f][i][p]
    std::vector<std::vector<std::vector<ReferenceModel>>> models(cfg.fusions.size());
    {
      EmbeddingCache ref_cache;
      for (std::size_t i = 0; i < n_sides; ++i) {
        const PairSet a = refs[i].materialized();
        std::vector<PairSet> a_nm;
        for (const PairSet& x : refs_nm[i]) a_nm.push_back(a.with_entries(x.entries()));
        for (std::size_t f = 0; f < cfg.fusions.size(); ++f) {
          const EmbeddingMatrix ea = embed_set(a, cfg.fusions[f], *embedder, ref_cache);
          std::vector<EmbeddingMatrix> ea_nm;
          for (const PairSet& x : a_nm) ea_nm.push_back(embed_set(x, cfg.fusions[f], *embedder, ref_cache));
          models[f].emplace_back();
          for (const ProjectionSpec& spec : cfg.projections) {
            ReferenceModel m;
            m.projection = fit_projection(ea, spec);
            auto project = [&m](const EmbeddingMatrix& e) {
              return m.projection.is_identity() ? e.to_double()
                                                : m.projection.apply(Eigen::MatrixXd(e.to_double()));
            };
            m.x = project(ea);
            if (need_stats) m.fx.emplace(gaussian_stats(m.x));
            for (const EmbeddingMatrix& e : ea_nm) {
              m.x_nm.push_back(project(e));
              if (need_stats) m.fx_nm.emplace_back(gaussian_stats(m.x_nm.back()));
            }
            models[f][i].push_back(std::move(m));
          }
        }
      }
    }

    for (std::size_t r = 0; r < cfg.n_repeats; ++r) {
      const uint64_t repeat_seed = derive_seed(cfg.seed, "repeat", r);
      for (std::size_t j = 0; j < n_sides; ++j) {
        EmbeddingCache cache;
        const PairSet b = cfg.candidate_equals_reference
                              ? refs[j].materialized()
                              : sample_pairs(sides[j].candidate, so, derive_seed(repeat_seed, "candidate", j))
                                    .materialized();
        std::vector<PairSet> perturbed;
        for (Condition cond : variants) {
          const uint64_t s = derive_seed(repeat_seed, "condition:" + to_string(cond), j);
          perturbed.push_back(apply_condition(b, cond, s));
        }

        for (std::size_t f = 0; f < cfg.fusions.size(); ++f) {
          const EmbeddingMatrix eb = embed_set(b, cfg.fusions[f], *embedder, cache);
          std::vector<EmbeddingMatrix> ep;
          for (std::size_t v = 0; v < variants.size(); ++v) {
            ep.push_back(variants[v] == Condition::None
                             ? eb
                             : embed_set(perturbed[v], cfg.fusions[f], *embedder, cache));
          }
          for (std::size_t i = 0; i < n_sides; ++i) {
            for (std::size_t p = 0; p < cfg.projections.size(); ++p) {
              const ReferenceModel& m = models[f][i][p];
              const Candidate cb = prepare_candidate(m, eb, need_stats);
              std::vector<Candidate> cp;
              for (const EmbeddingMatrix& e : ep) cp.push_back(prepare_candidate(m, e, need_stats));
              for (Metric metric : cfg.metrics) {
                const Distances db = score_candidate(metric, m, cb, need_nm);
                for (std::size_t v = 0; v < variants.size(); ++v) {
                  const Distances dp = score_candidate(metric, m, cp[v], need_nm);
                  Record rec;
                  rec.experiment = experiment;
                  rec.repeat = r;
                  rec.seed = repeat_seed;
                  rec.embedder = emb_id;
                  rec.fusion = to_string(cfg.fusions[f]);
                  rec.projection = cfg.projections[p].label();
                  rec.metric = to_string(metric);
                  rec.reference = sides[i].name;
                  rec.candidate = sides[j].name;
                  rec.grouping = i == j ? "within" : "between";
                  rec.condition = to_string(variants[v]);
                  rec.d_ref_cand = db.d_ref;
                  rec.d_ref_pert = dp.d_ref;
                  if (need_nm) {
                    rec.d_refnm_cand = db.d_nm;
                    rec.d_refnm_pert = dp.d_nm;
                    rec.score_cand = db.score;
                    rec.score_pert = dp.score;
                  }
                  report.records.push_back(std::move(rec));
                }
              }
            }
          }
        }
      }
    }
  }

  add_sign_tests(report);
  if (experiment == 3) add_cles(report);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

EvalReport run_experiment1(const RunConfig& cfg) { return run_experiment(cfg, 1); }
EvalReport run_experiment2(const RunConfig& cfg) { return run_experiment(cfg, 2); }
EvalReport run_experiment3(const RunConfig& cfg) { return run_experiment(cfg, 3); }

void write_report(const EvalReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "report.json", std::ios::trunc);
    if (!out) throw DataError("cannot write " + (dir / "report.json").string());
    out << report.to_json().dump(2) << '\n';
  }
  std::ofstream out(dir / "records.csv", std::ios::trunc | std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir / "records.csv").string());
  out << report.records_csv();
}

}  // namespace apa
