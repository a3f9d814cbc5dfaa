#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metaphor/commands.hpp"

namespace {

namespace fs = std::filesystem;
using metaphor::RunConfig;

// Flags override config-file values only when actually given on the command
// line, so bind into a scratch copy and merge by count afterwards.
struct ConfigFlags {
  std::string config_file;
  RunConfig scratch;
  CLI::Option* vocab = nullptr;
  CLI::Option* min_feature_count = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* m1 = nullptr;
  CLI::Option* iters = nullptr;
  CLI::Option* tol = nullptr;
  CLI::Option* level = nullptr;
  CLI::Option* top_k = nullptr;
  CLI::Option* exact_targets = nullptr;

  RunConfig resolve() const {
    RunConfig config;
    if (!config_file.empty()) config = metaphor::parse_config_file(config_file);
    if (vocab && vocab->count()) config.vocabulary = scratch.vocabulary;
    if (min_feature_count && min_feature_count->count()) {
      config.min_feature_count = scratch.min_feature_count;
    }
    if (seed && seed->count()) config.seed = scratch.seed;
    if (m1 && m1->count()) config.m1 = scratch.m1;
    if (iters && iters->count()) config.iterations = scratch.iterations;
    if (tol && tol->count()) config.tol = scratch.tol;
    if (level && level->count()) config.level = scratch.level;
    if (top_k && top_k->count()) config.top_k = scratch.top_k;
    if (exact_targets && exact_targets->count()) config.exact_targets = scratch.exact_targets;
    return config;
  }
};

void add_common(CLI::App* cmd, ConfigFlags& flags, std::string& out_dir) {
  cmd->add_option("--config", flags.config_file, "configuration file (key = value lines)");
  cmd->add_option("--out-dir", out_dir, "output directory (default runs/<stamp>-<config hash>)");
}

fs::path pick_out_dir(const std::string& out_dir, const RunConfig& config) {
  if (!out_dir.empty()) return out_dir;
  return metaphor::default_run_dir(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical concept graphs and metaphorical associations from verb co-occurrence"};
  app.require_subcommand(1);

  ConfigFlags flags;
  std::string out_dir;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "build noun feature vectors from parsed triples");
  std::string triples_path;
  ingest->add_option("triples", triples_path, "TSV of verb<TAB>relation<TAB>noun<TAB>count")
      ->required();
  flags.vocab = ingest->add_option("--vocab", flags.scratch.vocabulary,
                                   "keep the most frequent N nouns");
  flags.min_feature_count = ingest->add_option("--min-feature-count",
                                               flags.scratch.min_feature_count,
                                               "drop noun/feature cells below this raw count");
  add_common(ingest, flags, out_dir);

  // train
  auto* train = app.add_subcommand("train", "factorize the similarity graph into a hierarchy");
  std::string features_path;
  std::string w_cache;
  train->add_option("features", features_path, "features.json from `ingest`")->required();
  flags.seed = train->add_option("--seed", flags.scratch.seed, "master RNG seed");
  flags.m1 = train->add_option("--m1", flags.scratch.m1, "cluster count at the first level");
  flags.iters = train->add_option("--iters", flags.scratch.iterations,
                                  "maximum multiplicative updates per level");
  flags.tol = train->add_option("--tol", flags.scratch.tol, "relative cost tolerance");
  train->add_option("--w-cache", w_cache, "reuse or create a similarity matrix cache here");
  add_common(train, flags, out_dir);

  // baseline
  auto* baseline = app.add_subcommand(
      "baseline", "agglomerative clustering cut to the trained hierarchy's shape");
  std::string baseline_features;
  std::string baseline_graph;
  baseline->add_option("features", baseline_features, "features.json from `ingest`")->required();
  baseline->add_option("graph", baseline_graph, "graph.mga from `train`")->required();
  add_common(baseline, flags, out_dir);

  // query
  auto* query = app.add_subcommand("query", "rank metaphorical target clusters for source nouns");
  std::string query_archive;
  std::vector<std::string> query_sources;
  std::string sources_file;
  query->add_option("archive", query_archive, "graph.mga or baseline.mga")->required();
  query->add_option("source", query_sources, "source nouns");
  query->add_option("--sources", sources_file, "file with one source noun per line");
  flags.level = query->add_option("--level", flags.scratch.level, "hierarchy level to query");
  flags.top_k = query->add_option("--top-k", flags.scratch.top_k, "clusters to consider");
  flags.exact_targets = query->add_flag("--exact-targets", flags.scratch.exact_targets,
                                        "count top-k after excluding the literal cluster");
  add_common(query, flags, out_dir);

  // eval
  auto* eval = app.add_subcommand("eval", "score mappings against judgments and a gold standard");
  std::vector<std::string> mappings_paths;
  std::vector<std::string> judgment_paths;
  std::string gold_path;
  eval->add_option("--mappings", mappings_paths, "mappings.json files from `query`")
      ->required()
      ->take_all();
  eval->add_option("--judgments", judgment_paths, "annotator judgment files")->take_all();
  eval->add_option("--gold", gold_path, "gold standard TSV");
  add_common(eval, flags, out_dir);

  // export
  auto* exp = app.add_subcommand("export", "dump an archive's manifest and cluster contents");
  std::string export_archive;
  exp->add_option("archive", export_archive, "any .mga archive")->required();
  add_common(exp, flags, out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const RunConfig config = flags.resolve();
    const fs::path run_dir = pick_out_dir(out_dir, config);
    if (ingest->parsed()) {
      metaphor::cmd_ingest(triples_path, config, run_dir);
    } else if (train->parsed()) {
      metaphor::cmd_train(features_path, config, run_dir, w_cache);
    } else if (baseline->parsed()) {
      metaphor::cmd_baseline(baseline_features, baseline_graph, config, run_dir);
    } else if (query->parsed()) {
      std::vector<std::string> sources = query_sources;
      if (!sources_file.empty()) {
        for (auto& s : metaphor::read_source_list(sources_file)) sources.push_back(std::move(s));
      }
      metaphor::cmd_query(query_archive, sources, config, run_dir);
    } else if (eval->parsed()) {
      std::vector<fs::path> mappings(mappings_paths.begin(), mappings_paths.end());
      std::vector<fs::path> judgments(judgment_paths.begin(), judgment_paths.end());
      std::optional<fs::path> gold;
      if (!gold_path.empty()) gold = gold_path;
      metaphor::cmd_eval(mappings, judgments, gold, config, run_dir);
    } else if (exp->parsed()) {
      metaphor::cmd_export(export_archive, run_dir);
    }
  } catch (const metaphor::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const metaphor::data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
