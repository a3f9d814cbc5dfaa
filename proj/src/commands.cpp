#include "metaphor/commands.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "metaphor/archive.hpp"
#include "metaphor/evaluation.hpp"

namespace metaphor {

using nlohmann::json;

std::vector<std::string> decision_record() {
  return {
      "noun similarity is 1 - Jensen-Shannon divergence (log base 2)",
      "membership columns update before cluster masses within one iteration",
      "per-level RNG seed = master seed + zero-based level index",
      "a level's non-empty count follows the nouns' hard-assignment chain",
      "baseline ranking row-normalizes 1 - jsd centroid weights into the same chained product",
      "recall uses exact-string lexicalization matching",
  };
}

namespace {

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw data_error("cannot create directory '" + dir.string() + "': " + ec.message());
}

json provenance(const RunConfig& config,
                const std::vector<std::pair<std::string, std::filesystem::path>>& inputs) {
  json out;
  out["config"] = config_json(config);
  out["decisions"] = decision_record();
  json input_list = json::array();
  for (const auto& [role, path] : inputs) {
    input_list.push_back(
        {{"role", role}, {"file", path.filename().string()}, {"hash", file_content_hash(path)}});
  }
  out["inputs"] = std::move(input_list);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw data_error("failed while writing '" + path.string() + "'");
}

std::string format_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

SimilarityMatrix similarity_with_cache(const FeatureMatrix& features,
                                       const std::filesystem::path& features_path,
                                       const std::filesystem::path& w_cache) {
  if (w_cache.empty()) return similarity_matrix(features);

  const std::string features_hash = file_content_hash(features_path);
  if (std::filesystem::exists(w_cache)) {
    ArchiveReader reader(w_cache);
    if (reader.kind() != "similarity-cache") {
      throw data_error("'" + w_cache.string() + "' is not a similarity cache");
    }
    if (reader.manifest().at("features_hash").get<std::string>() != features_hash) {
      throw data_error("similarity cache '" + w_cache.string() +
                       "' is stale (features changed); delete it or point --w-cache elsewhere");
    }
    SimilarityMatrix similarity;
    similarity.values = reader.read_matrix("w");
    similarity.lexicon = features.lexicon;
    similarity.flagged = features.flagged;
    return similarity;
  }

  SimilarityMatrix similarity = similarity_matrix(features);
  ArchiveWriter writer("similarity-cache");
  writer.manifest()["features_hash"] = features_hash;
  writer.manifest()["labels"] = features.lexicon.nouns();
  writer.add_matrix("w", similarity.values);
  writer.save(w_cache);
  std::cerr << "wrote similarity cache " << w_cache.string() << "\n";
  return similarity;
}

}  // namespace

std::filesystem::path default_run_dir(const RunConfig& config) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm utc{};
  gmtime_r(&t, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%SZ", &utc);
  return std::filesystem::path("runs") / (std::string(stamp) + "-" + config_hash(config));
}

std::vector<std::string> read_source_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open source list '" + path.string() + "'");
  std::vector<std::string> sources;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view stripped = line;
    while (!stripped.empty() && std::isspace(static_cast<unsigned char>(stripped.front()))) {
      stripped.remove_prefix(1);
    }
    while (!stripped.empty() && std::isspace(static_cast<unsigned char>(stripped.back()))) {
      stripped.remove_suffix(1);
    }
    if (stripped.empty() || stripped.front() == '#') continue;
    sources.emplace_back(stripped);
  }
  return sources;
}

std::filesystem::path cmd_ingest(const std::filesystem::path& triples_path,
                                 const RunConfig& config,
                                 const std::filesystem::path& out_dir) {
  std::ifstream in(triples_path);
  if (!in) throw data_error("cannot open triples file '" + triples_path.string() + "'");
  const auto records = parse_triples(in);
  if (records.empty()) throw data_error("no triples in '" + triples_path.string() + "'");

  NounLexicon lexicon = select_vocabulary(records, config.vocabulary);
  FeatureMatrix features = build_feature_matrix(records, std::move(lexicon),
                                                config.min_feature_count);
  ensure_dir(out_dir);
  const std::filesystem::path out = out_dir / "features.json";
  save_features(features, out, provenance(config, {{"triples", triples_path}}));

  std::cout << "ingested " << records.size() << " records; " << features.rows() << " nouns, "
            << features.cols() << " features, " << features.flagged.size()
            << " nouns without features\n"
            << "wrote " << out.string() << "\n";
  return out;
}

std::filesystem::path cmd_train(const std::filesystem::path& features_path,
                                const RunConfig& config, const std::filesystem::path& out_dir,
                                const std::filesystem::path& w_cache) {
  const FeatureMatrix features = load_features(features_path);
  const SimilarityMatrix similarity = similarity_with_cache(features, features_path, w_cache);

  HierarchyOptions options;
  options.m1 = config.m1;
  options.max_iterations = config.iterations;
  options.tol = config.tol;
  options.tol_streak = config.tol_streak;
  options.seed = config.seed;
  const ConceptGraph graph = build_hierarchy(similarity, options);

  for (Index level = 1; level <= graph.depth(); ++level) {
    const HierarchyLevel& built = graph.levels[static_cast<std::size_t>(level - 1)];
    std::cout << "level " << level << ": " << built.factor.clusters() << " clusters, "
              << built.non_empty << " non-empty, cost " << format_score(built.factor.cost)
              << " after " << built.factor.iterations << " iterations\n";
  }

  ensure_dir(out_dir);
  const std::filesystem::path out = out_dir / "graph.mga";
  save_graph(graph, out, provenance(config, {{"features", features_path}}));
  std::cout << "wrote " << out.string() << "\n";
  return out;
}

std::filesystem::path cmd_baseline(const std::filesystem::path& features_path,
                                   const std::filesystem::path& graph_path,
                                   const RunConfig& config,
                                   const std::filesystem::path& out_dir) {
  const FeatureMatrix features = load_features(features_path);
  const ConceptGraph graph = load_graph(graph_path);

  const ExplicitGraph view = explicit_view(graph);
  std::vector<Index> level_sizes;
  level_sizes.reserve(view.levels.size());
  for (const auto& level : view.levels) {
    level_sizes.push_back(static_cast<Index>(level.clusters.size()));
  }

  const Dendrogram dendrogram = ward_cluster(features);
  const std::vector<Partition> stack = cut_to_shape(dendrogram, level_sizes);
  const BaselineGraph baseline = baseline_graph(stack, features);

  ensure_dir(out_dir);
  const std::filesystem::path out = out_dir / "baseline.mga";
  json extra = provenance(config, {{"features", features_path}, {"graph", graph_path}});
  extra["system"] = "agg";
  save_baseline(baseline, out, extra);
  std::cout << "baseline levels:";
  for (Index size : level_sizes) std::cout << " " << size;
  std::cout << "\nwrote " << out.string() << "\n";
  return out;
}

namespace {

json mapping_json(const MetaphorMapping& mapping) {
  return {{"rank", mapping.rank},
          {"cluster", mapping.cluster_id},
          {"score", mapping.score},
          {"cluster_hash", cluster_content_hash(mapping.members)},
          {"members", mapping.members}};
}

std::string render_report(const BatchResult& batch, Index level) {
  std::ostringstream out;
  bool first = true;
  for (const auto& summary : batch.summary) {
    if (!first) out << "\n";
    first = false;
    out << "SOURCE: " << summary.source << " (level " << level << ")\n";
    for (const auto& mapping : batch.mappings) {
      if (mapping.source != summary.source) continue;
      out << "  TARGET " << mapping.rank << "  p=" << format_score(mapping.score) << "  cluster "
          << mapping.cluster_id << ":";
      for (const auto& member : mapping.members) out << " " << member;
      out << "\n";
    }
    if (!summary.note.empty()) out << "  (" << summary.note << ")\n";
  }
  return out.str();
}

}  // namespace

QueryOutput cmd_query(const std::filesystem::path& archive_path,
                      const std::vector<std::string>& sources, const RunConfig& config,
                      const std::filesystem::path& out_dir) {
  if (sources.empty()) throw data_error("no source nouns given");

  QueryOptions options;
  options.level = config.level;
  options.top_k = config.top_k;
  options.exact_targets = config.exact_targets;

  ArchiveReader probe(archive_path);
  const std::string kind = probe.kind();
  BatchResult batch;
  std::string system;
  if (kind == "concept-graph") {
    const ConceptGraph graph = load_graph(archive_path);
    batch = batch_identify(graph, sources, options);
    system = "hgfc";
  } else if (kind == "baseline-graph") {
    const BaselineGraph graph = load_baseline(archive_path);
    batch = baseline_batch(graph, sources, options);
    system = "agg";
  } else {
    throw data_error("archive '" + archive_path.string() + "' holds a " + kind +
                     "; pass a graph from `train` or `baseline`");
  }

  json out;
  out["format"] = "metaphor-mappings-1";
  out["system"] = system;
  out["level"] = options.level;
  out["provenance"] = provenance(config, {{"archive", archive_path}});
  json queries = json::array();
  for (const auto& summary : batch.summary) {
    json entry;
    entry["source"] = summary.source;
    entry["note"] = summary.note;
    json mappings = json::array();
    for (const auto& mapping : batch.mappings) {
      if (mapping.source == summary.source) mappings.push_back(mapping_json(mapping));
    }
    entry["mappings"] = std::move(mappings);
    queries.push_back(std::move(entry));
  }
  out["queries"] = std::move(queries);

  ensure_dir(out_dir);
  QueryOutput paths{out_dir / "mappings.json", out_dir / "report.txt"};
  write_text(paths.json, out.dump(2) + "\n");
  const std::string report = render_report(batch, options.level);
  write_text(paths.report, report);
  std::cout << report;
  return paths;
}

namespace {

struct LoadedMappings {
  std::string system;
  std::vector<MetaphorMapping> mappings;
  std::filesystem::path path;
};

LoadedMappings load_mappings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open mappings file '" + path.string() + "'");
  json parsed;
  try {
    parsed = json::parse(in);
  } catch (const json::exception& e) {
    throw data_error("mappings file '" + path.string() + "' is not valid JSON (" + e.what() + ")");
  }
  if (parsed.value("format", "") != "metaphor-mappings-1") {
    throw data_error("'" + path.string() + "' is not a mappings file; pass the output of `query`");
  }
  LoadedMappings out;
  out.path = path;
  out.system = parsed.at("system").get<std::string>();
  const Index level = parsed.at("level").get<Index>();
  for (const auto& query : parsed.at("queries")) {
    const std::string source = query.at("source").get<std::string>();
    for (const auto& m : query.at("mappings")) {
      MetaphorMapping mapping;
      mapping.source = source;
      mapping.level = level;
      mapping.rank = m.at("rank").get<Index>();
      mapping.cluster_id = m.at("cluster").get<Index>();
      mapping.score = m.at("score").get<double>();
      mapping.members = m.at("members").get<std::vector<std::string>>();
      out.mappings.push_back(std::move(mapping));
    }
  }
  return out;
}

}  // namespace

QueryOutput cmd_eval(const std::vector<std::filesystem::path>& mappings_paths,
                     const std::vector<std::filesystem::path>& judgment_paths,
                     const std::optional<std::filesystem::path>& gold_path,
                     const RunConfig& config, const std::filesystem::path& out_dir) {
  if (mappings_paths.empty()) throw data_error("no mappings files given");
  if (judgment_paths.empty() && !gold_path) {
    throw data_error("nothing to evaluate: pass judgment files, a gold standard, or both");
  }

  std::vector<LoadedMappings> loaded;
  for (const auto& path : mappings_paths) loaded.push_back(load_mappings(path));

  std::vector<JudgmentFile> judgments;
  for (const auto& path : judgment_paths) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open judgment file '" + path.string() + "'");
    try {
      judgments.push_back(parse_judgments(in));
    } catch (const data_error& e) {
      throw data_error("judgment file '" + path.string() + "': " + e.what());
    }
  }

  std::optional<GoldStandard> gold;
  if (gold_path) {
    std::ifstream in(*gold_path);
    if (!in) throw data_error("cannot open gold standard '" + gold_path->string() + "'");
    try {
      gold = parse_gold(in);
    } catch (const data_error& e) {
      throw data_error("gold standard '" + gold_path->string() + "': " + e.what());
    }
  }

  json out;
  out["format"] = "metaphor-eval-1";
  std::vector<std::pair<std::string, std::filesystem::path>> input_files;
  for (const auto& m : loaded) input_files.push_back({"mappings", m.path});
  for (const auto& path : judgment_paths) input_files.push_back({"judgments", path});
  if (gold_path) input_files.push_back({"gold", *gold_path});
  out["provenance"] = provenance(config, input_files);

  std::vector<SystemScore> table_rows;
  json systems = json::array();
  for (const auto& m : loaded) {
    SystemScore row;
    row.system = m.system;
    json system_json;
    system_json["system"] = m.system;
    system_json["mappings"] = m.mappings.size();
    if (!judgments.empty()) {
      const PrecisionReport p = precision(m.mappings, judgments);
      row.precision = p.average;
      json per = json::array();
      for (const auto& [annotator, value] : p.per_annotator) {
        per.push_back({{"annotator", annotator}, {"precision", value}});
      }
      system_json["precision"] = {{"average", p.average}, {"per_annotator", std::move(per)}};
    }
    if (gold) {
      const RecallReport r = recall(m.mappings, *gold);
      row.recall = r.recall;
      json outcomes = json::array();
      for (const auto& outcome : r.outcomes) {
        outcomes.push_back(
            {{"source", outcome.source}, {"target", outcome.label}, {"hit", outcome.hit}});
      }
      system_json["recall"] = {{"value", r.recall},
                               {"hits", r.hits},
                               {"gold_size", r.gold_size},
                               {"outcomes", std::move(outcomes)}};
    }
    systems.push_back(std::move(system_json));
    table_rows.push_back(std::move(row));
  }
  out["systems"] = std::move(systems);

  // Agreement between annotator pairs over the union of evaluated mappings.
  json kappa_list = json::array();
  std::ostringstream kappa_text;
  if (judgments.size() >= 2) {
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& m : loaded) {
      for (const auto& mapping : m.mappings) {
        keys.emplace_back(mapping.source, cluster_content_hash(mapping.members));
      }
    }
    std::vector<std::vector<bool>> verdicts(judgments.size());
    for (std::size_t a = 0; a < judgments.size(); ++a) {
      std::map<std::pair<std::string, std::string>, bool> lookup;
      for (const auto& entry : judgments[a].entries) {
        lookup[{entry.source, entry.cluster_hash}] = entry.valid;
      }
      for (const auto& key : keys) verdicts[a].push_back(lookup.at(key));
    }
    for (std::size_t a = 0; a < judgments.size(); ++a) {
      for (std::size_t b = a + 1; b < judgments.size(); ++b) {
        const double kappa = cohen_kappa(verdicts[a], verdicts[b]);
        kappa_list.push_back({{"annotators", {judgments[a].annotator, judgments[b].annotator}},
                              {"kappa", kappa}});
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", kappa);
        kappa_text << "kappa(" << judgments[a].annotator << ", " << judgments[b].annotator
                   << ") = " << buf << "\n";
      }
    }
  }
  out["kappa"] = std::move(kappa_list);

  const std::string table = render_results_table(table_rows);
  std::string text = table;
  if (gold) text += "note: recall uses exact-string lexicalization matching\n";
  text += kappa_text.str();
  out["table"] = table;

  ensure_dir(out_dir);
  QueryOutput paths{out_dir / "eval.json", out_dir / "eval.txt"};
  write_text(paths.json, out.dump(2) + "\n");
  write_text(paths.report, text);
  std::cout << text;
  return paths;
}

std::filesystem::path cmd_export(const std::filesystem::path& archive_path,
                                 const std::filesystem::path& out_dir) {
  ArchiveReader reader(archive_path);
  ensure_dir(out_dir);
  const std::filesystem::path out = out_dir / "export.json";
  write_text(out, reader.manifest().dump(2) + "\n");

  std::ostringstream summary;
  summary << "kind: " << reader.kind() << "\n";
  if (reader.kind() == "concept-graph") {
    const ConceptGraph graph = load_graph(archive_path);
    const ExplicitGraph view = explicit_view(graph);
    for (Index level = 1; level <= graph.depth(); ++level) {
      const auto& clusters = view.levels[static_cast<std::size_t>(level - 1)].clusters;
      summary << "level " << level << ": "
              << graph.levels[static_cast<std::size_t>(level - 1)].factor.clusters()
              << " clusters, " << clusters.size() << " non-empty\n";
      for (const auto& cluster : clusters) {
        summary << "  cluster " << cluster.cluster_id << ":";
        for (Index member : cluster.members) summary << " " << graph.lexicon.noun(member);
        summary << "\n";
      }
    }
  } else if (reader.kind() == "baseline-graph") {
    const BaselineGraph graph = load_baseline(archive_path);
    for (Index level = 1; level <= graph.depth(); ++level) {
      const auto& clusters = graph.levels[static_cast<std::size_t>(level - 1)].clusters;
      summary << "level " << level << ": " << clusters.size() << " clusters\n";
      for (std::size_t c = 0; c < clusters.size(); ++c) {
        summary << "  cluster " << c << ":";
        for (Index member : clusters[c]) summary << " " << graph.features.lexicon.noun(member);
        summary << "\n";
      }
    }
  }
  const std::filesystem::path text_out = out_dir / "export.txt";
  write_text(text_out, summary.str());
  std::cout << summary.str();
  return out;
}

}  // namespace metaphor
