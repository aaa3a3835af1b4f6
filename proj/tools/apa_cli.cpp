// apa: command-line front end for the prompt adherence pipeline.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "apa/adherence.hpp"
#include "apa/aemb.hpp"
#include "apa/dataset.hpp"
#include "apa/fusion.hpp"
#include "apa/harness.hpp"
#include "apa/manifest.hpp"
#include "apa/metrics.hpp"
#include "apa/parallel.hpp"
#include "apa/perturb.hpp"
#include "apa/projection.hpp"
#include "apa/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool g_json = false;

void emit(const json& machine, const std::string& human) {
  if (g_json) {
    std::cout << machine.dump() << '\n';
  } else {
    std::cout << human << '\n';
  }
}

fs::path cache_root(const fs::path& out_dir) {
  if (const char* env = std::getenv("ADHERENCE_CACHE_DIR"); env && *env) return env;
  return out_dir / "windows";
}

// "name=path" or a plain path (the name is the directory name).
std::pair<std::string, fs::path> split_collection_arg(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq != std::string::npos && eq > 0) return {arg.substr(0, eq), arg.substr(eq + 1)};
  fs::path p(arg);
  std::string name = p.filename().string();
  if (name.empty()) name = p.parent_path().filename().string();
  return {name, p};
}

struct PairsArgs {
  std::vector<std::string> collections;
  std::size_t n_windows = 10000;
  uint64_t seed = 0;
  std::string out;
  double window_seconds = 5.0;
  double hop_seconds = 1.0;
  double silence_db = -60.0;
  bool allow_replacement = false;
  double mix_gain = 1.0;
  bool no_peak_normalize = false;
};

int run_pairs(const PairsArgs& a) {
  apa::SamplingOptions so;
  so.n_windows = a.n_windows;
  so.window_seconds = a.window_seconds;
  so.hop_seconds = a.hop_seconds;
  so.silence_threshold_db = a.silence_db;
  so.allow_replacement = a.allow_replacement;
  so.mix.gain = a.mix_gain;
  so.mix.peak_normalize = !a.no_peak_normalize;
  const fs::path out(a.out);
  json summary = json::array();
  for (const std::string& arg : a.collections) {
    const auto [name, path] = split_collection_arg(arg);
    auto col = std::make_shared<apa::Collection>(apa::load_collection(path));
    col->name = name;
    const apa::EligibleGrid grid = apa::eligible_windows(*col, so);
    std::cerr << name << ": " << grid.slots.size() << " eligible windows of " << grid.grid_positions
              << " grid positions\n";
    const apa::PairSet pairs = apa::sample_pairs(col, so, a.seed);
    const fs::path windows = cache_root(out) / name;
    const fs::path manifest = out / (name + ".pairs.json");
    apa::write_window_cache(pairs, windows);
    apa::write_manifest(pairs, manifest, windows);
    summary.push_back(json{{"collection", name},
                           {"eligible", grid.slots.size()},
                           {"grid_positions", grid.grid_positions},
                           {"pairs", pairs.size()},
                           {"manifest", manifest.string()},
                           {"windows", windows.string()}});
    if (!g_json) {
      std::cout << "wrote " << pairs.size() << " pairs to " << manifest.string() << " (windows in "
                << windows.string() << ")\n";
    }
  }
  if (g_json) std::cout << summary.dump() << '\n';
  return 0;
}

struct EmbedArgs {
  std::string pairs;
  std::string backend = "builtin";
  std::string fusion = "mix";
  std::string out;
  bool nonmatching = false;
  std::string condition;
  uint64_t seed = 0;
};

int run_embed(const EmbedArgs& a) {
  apa::PairSet pairs = apa::read_manifest(a.pairs);
  if (a.nonmatching && !a.condition.empty()) {
    throw apa::ConfigError("--nonmatching and --condition are exclusive");
  }
  if (a.nonmatching) pairs = apa::make_nonmatching(pairs, a.seed);
  if (!a.condition.empty()) pairs = apa::apply_condition(pairs, apa::parse_condition(a.condition), a.seed);
  const apa::FusionMethod fusion = apa::parse_fusion(a.fusion);

  apa::EmbeddingMatrix m;
  if (a.backend.rfind("external:", 0) == 0) {
    const fs::path src = a.backend.substr(9);
    m = apa::read_embeddings(src);
    if (m.rows() != pairs.size()) {
      throw apa::DataError("row/manifest mismatch: " + src.string() + " has " + std::to_string(m.rows()) +
                           " rows, the manifest lists " + std::to_string(pairs.size()) + " pairs");
    }
  } else {
    const auto embedder = apa::make_embedder(a.backend);
    apa::EmbeddingCache cache;
    m = apa::fuse_pairs(pairs, fusion, *embedder, fusion == apa::FusionMethod::Mix ? nullptr : &cache);
  }
  apa::write_embeddings(m, a.out);
  emit(json{{"out", a.out}, {"rows", m.rows()}, {"cols", m.cols()}, {"backend_id", m.backend_id}},
       "wrote " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + " embeddings (" +
           m.backend_id + ") to " + a.out);
  return 0;
}

struct ScoreArgs {
  std::string reference;
  std::string reference_nm;
  std::string reference_pairs;
  std::string candidate;
  std::vector<std::string> metrics;
  std::string projection = "np";
  uint64_t seed = 0;
};

int run_score(const ScoreArgs& a) {
  const apa::EmbeddingMatrix x = apa::read_embeddings(a.reference);
  const apa::EmbeddingMatrix y = apa::read_embeddings(a.candidate);
  apa::EmbeddingMatrix x_nm;
  json seeds{{"derangement", nullptr}};
  if (!a.reference_nm.empty()) {
    x_nm = apa::read_embeddings(a.reference_nm);
  } else if (!a.reference_pairs.empty()) {
    // Recompute X' from the reference pairs with the builtin embedder.
    const auto slash = x.backend_id.find('/');
    if (slash == std::string::npos) {
      throw apa::ConfigError("reference backend id '" + x.backend_id + "' does not name a fusion");
    }
    const auto embedder = apa::make_embedder(x.backend_id.substr(0, slash));
    const apa::FusionMethod fusion = apa::parse_fusion(x.backend_id.substr(slash + 1));
    const apa::PairSet pairs = apa::read_manifest(a.reference_pairs);
    if (pairs.size() != x.rows()) {
      throw apa::DataError("row/manifest mismatch: reference embeddings have " + std::to_string(x.rows()) +
                           " rows, the manifest lists " + std::to_string(pairs.size()) + " pairs");
    }
    apa::EmbeddingCache cache;
    x_nm = apa::fuse_pairs(apa::make_nonmatching(pairs, a.seed), fusion, *embedder, &cache);
    seeds["derangement"] = a.seed;
  } else {
    throw apa::ConfigError("score needs --reference-nm-emb or --reference-pairs to build the non-matching reference");
  }
  if (x.cols() != y.cols() || x.cols() != x_nm.cols()) {
    throw apa::DataError("dimension mismatch between reference, non-matching reference and candidate embeddings");
  }
  const apa::ProjectionSpec spec = apa::ProjectionSpec::parse(a.projection);
  const apa::Projection proj = apa::fit_projection(x, spec);
  const apa::EmbeddingMatrix px = apa::apply_projection(proj, x);
  const apa::EmbeddingMatrix px_nm = apa::apply_projection(proj, x_nm);
  const apa::EmbeddingMatrix py = apa::apply_projection(proj, y);

  std::vector<std::string> metrics = a.metrics.empty() ? std::vector<std::string>{"fad"} : a.metrics;
  for (const std::string& name : metrics) {
    const apa::Metric metric = apa::parse_metric(name);
    const apa::AdherenceScore s = apa::adherence_score(metric, px, px_nm, py);
    const json line{{"score", s.value},
                    {"d_matching", s.d_matching},
                    {"d_nonmatching", s.d_nonmatching},
                    {"metric", apa::to_string(metric)},
                    {"projection", spec.label()},
                    {"seeds", seeds}};
    std::cout << line.dump() << '\n';
  }
  return 0;
}

int run_exp(int experiment, const std::string& config, const std::string& out_override, std::size_t threads,
            bool threads_set) {
  apa::RunConfig cfg = apa::load_run_config(config);
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (threads_set) cfg.threads = threads;
  const apa::EvalReport report = apa::run_experiment(cfg, experiment);
  apa::write_report(report, cfg.output_dir);
  json tests = json::array();
  std::string human = "experiment " + std::to_string(experiment) + ": " + std::to_string(report.records.size()) +
                      " records written to " + cfg.output_dir.string();
  for (const auto& t : report.sign_tests) {
    tests.push_back(json{{"fusion", t.fusion},
                         {"projection", t.projection},
                         {"metric", t.metric},
                         {"grouping", t.grouping},
                         {"condition", t.condition},
                         {"p_value", t.p_value},
                         {"n_positive", t.n_positive},
                         {"n_effective", t.n_effective}});
    human += "\n  " + t.fusion + " " + t.projection + " " + t.metric + " " + t.grouping + " " + t.condition +
             ": " + std::to_string(t.n_positive) + "/" + std::to_string(t.n_effective) +
             " p=" + std::to_string(t.p_value) + std::string(static_cast<std::size_t>(t.stars), '*');
  }
  emit(json{{"experiment", experiment},
            {"records", report.records.size()},
            {"output_dir", cfg.output_dir.string()},
            {"sign_tests", tests},
            {"wall_seconds", report.wall_seconds}},
       human);
  return 0;
}

struct SynthArgs {
  std::string out;
  std::string name = "synth";
  std::string style = "a";
  std::size_t n_projects = 20;
  double seconds = 60.0;
  uint64_t seed = 0;
};

int run_synth(const SynthArgs& a) {
  apa::SynthOptions o;
  o.name = a.name;
  o.style_name = a.style;
  o.style = apa::synth_style(a.style);
  o.n_projects = a.n_projects;
  o.seconds = a.seconds;
  o.seed = a.seed;
  const apa::Collection c = apa::synthesize_collection(o);
  apa::write_collection(c, a.out);
  emit(json{{"out", a.out}, {"projects", c.projects.size()}},
       "wrote " + std::to_string(c.projects.size()) + " projects to " + a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audio prompt adherence: pair sampling, embedding, scoring and experiments"};
  app.require_subcommand(1);
  std::size_t threads = 1;
  app.add_flag("--json", g_json, "Machine-readable JSON output");
  CLI::Option* threads_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  PairsArgs pa;
  auto* pairs = app.add_subcommand("pairs", "Sample matching prompt/stem pairs and write a manifest");
  pairs->add_option("--collections", pa.collections, "Collection directories (name=path or path)")->required();
  pairs->add_option("--n-windows", pa.n_windows, "Pairs to sample")->required();
  pairs->add_option("--seed", pa.seed, "Sampling seed")->required();
  pairs->add_option("--out", pa.out, "Output directory")->required();
  pairs->add_option("--window-seconds", pa.window_seconds);
  pairs->add_option("--hop-seconds", pa.hop_seconds);
  pairs->add_option("--silence-db", pa.silence_db, "Silence threshold in dBFS");
  pairs->add_flag("--allow-replacement", pa.allow_replacement, "Draw with replacement when the grid is too small");
  pairs->add_option("--mix-gain", pa.mix_gain);
  pairs->add_flag("--no-peak-normalize", pa.no_peak_normalize);

  EmbedArgs ea;
  auto* embed = app.add_subcommand("embed", "Embed the pairs of a manifest into an AEMB file");
  embed->add_option("--pairs", ea.pairs, "Pair manifest")->required();
  embed->add_option("--backend", ea.backend, "builtin | external:<file.aemb>");
  embed->add_option("--fusion", ea.fusion, "mix | sum | conc");
  embed->add_option("--out", ea.out, "Output AEMB file")->required();
  embed->add_flag("--nonmatching", ea.nonmatching, "Derange the stems first (seeded by --seed)");
  embed->add_option("--condition", ea.condition, "Apply a non-matching condition first (seeded by --seed)");
  embed->add_option("--seed", ea.seed);

  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "Adherence score of candidate embeddings");
  score->add_option("--reference-emb", sa.reference, "Matching reference embeddings")->required();
  score->add_option("--reference-nm-emb", sa.reference_nm, "Non-matching reference embeddings");
  score->add_option("--reference-pairs", sa.reference_pairs, "Reference manifest, to derive X' from");
  score->add_option("--candidate-emb", sa.candidate, "Candidate embeddings")->required();
  score->add_option("--metric", sa.metrics, "fad | mmd (repeatable)");
  score->add_option("--projection", sa.projection, "np | pca<k>");
  score->add_option("--seed", sa.seed, "Derangement seed");

  std::string config, exp_out;
  std::vector<CLI::App*> exps;
  for (int e = 1; e <= 3; ++e) {
    auto* sub = app.add_subcommand("exp" + std::to_string(e), "Run experiment " + std::to_string(e));
    sub->add_option("--config", config, "Run configuration JSON")->required();
    sub->add_option("--out", exp_out, "Override the output directory");
    exps.push_back(sub);
  }

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "Write a synthetic multitrack collection");
  synth->add_option("--out", ya.out, "Output directory")->required();
  synth->add_option("--name", ya.name);
  synth->add_option("--style", ya.style, "a | b");
  synth->add_option("--n-projects", ya.n_projects);
  synth->add_option("--seconds", ya.seconds);
  synth->add_option("--seed", ya.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  apa::set_thread_count(threads);
  try {
    if (*pairs) return run_pairs(pa);
    if (*embed) return run_embed(ea);
    if (*score) return run_score(sa);
    if (*synth) return run_synth(ya);
    for (int e = 1; e <= 3; ++e) {
      if (*exps[static_cast<std::size_t>(e - 1)]) {
        return run_exp(e, config, exp_out, threads, threads_opt->count() > 0);
      }
    }
  } catch (const apa::InsufficientWindowsError& e) {
    std::cerr << "error: insufficient eligible windows: requested " << e.requested() << ", eligible "
              << e.eligible() << ", shortfall " << e.shortfall() << '\n';
    return 3;
  } catch (const apa::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const apa::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const apa::MathDomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
