#include "metaphor/association.hpp"

#include <algorithm>

namespace metaphor {

namespace {

std::vector<RankedCluster> rank_against(const ExplicitLevel& level_view,
                                        const Vector<double>& soft) {
  std::vector<RankedCluster> ranked;
  ranked.reserve(level_view.clusters.size());
  for (const auto& cluster : level_view.clusters) {
    ranked.push_back({cluster.cluster_id, soft(cluster.cluster_id), cluster.members});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedCluster& a, const RankedCluster& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.cluster_id < b.cluster_id;
  });
  return ranked;
}

QueryResult identify_with_view(const ConceptGraph& graph, const ExplicitGraph& view,
                               std::string_view source, const QueryOptions& options) {
  const Index source_index = resolve_noun(graph.lexicon, graph.flagged, source);
  const Vector<double> soft = soft_assignment(graph, source, options.level);
  const auto& level_view = view.levels[static_cast<std::size_t>(options.level - 1)];
  const auto ranked = rank_against(level_view, soft);
  return select_targets(ranked, graph.lexicon, source, source_index, options);
}

void check_query_options(const ConceptGraph& graph, const QueryOptions& options) {
  check_level(graph, options.level);
  if (options.top_k < 1) {
    throw data_error("top-k must be at least 1, got " + std::to_string(options.top_k));
  }
}

}  // namespace

QueryResult select_targets(const std::vector<RankedCluster>& ranked, const NounLexicon& lexicon,
                           std::string_view source, Index source_index,
                           const QueryOptions& options) {
  QueryResult result;
  std::size_t considered = 0;
  for (const auto& cluster : ranked) {
    const bool literal =
        std::binary_search(cluster.members.begin(), cluster.members.end(), source_index);
    if (options.exact_targets) {
      if (result.mappings.size() >= static_cast<std::size_t>(options.top_k)) break;
      if (literal) continue;
    } else {
      if (considered >= static_cast<std::size_t>(options.top_k)) break;
      ++considered;
      if (literal) continue;
    }
    MetaphorMapping mapping;
    mapping.source = std::string(source);
    mapping.level = options.level;
    mapping.rank = static_cast<Index>(result.mappings.size()) + 1;
    mapping.cluster_id = cluster.cluster_id;
    mapping.score = cluster.probability;
    mapping.members.reserve(cluster.members.size());
    for (Index i : cluster.members) mapping.members.push_back(lexicon.noun(i));
    result.mappings.push_back(std::move(mapping));
  }
  if (result.mappings.empty()) {
    if (ranked.size() == 1) {
      result.diagnostic = "the cluster containing '" + std::string(source) +
                          "' is the only cluster at this level; no targets to report";
    } else {
      result.diagnostic = "every selected cluster contains '" + std::string(source) +
                          "'; raise top-k or change the level";
    }
  }
  return result;
}

std::vector<RankedCluster> rank_clusters(const ConceptGraph& graph, std::string_view source,
                                         Index level) {
  check_level(graph, level);
  const Vector<double> soft = soft_assignment(graph, source, level);
  const ExplicitGraph view = explicit_view(graph);
  return rank_against(view.levels[static_cast<std::size_t>(level - 1)], soft);
}

QueryResult identify_metaphors(const ConceptGraph& graph, std::string_view source,
                               const QueryOptions& options) {
  check_query_options(graph, options);
  const ExplicitGraph view = explicit_view(graph);
  return identify_with_view(graph, view, source, options);
}

BatchResult batch_identify(const ConceptGraph& graph, const std::vector<std::string>& sources,
                           const QueryOptions& options) {
  check_query_options(graph, options);
  const ExplicitGraph view = explicit_view(graph);
  return run_batch(sources, [&](const std::string& source) {
    return identify_with_view(graph, view, source, options);
  });
}

}  // namespace metaphor
