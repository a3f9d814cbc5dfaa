#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "metaphor/hierarchy.hpp"

namespace metaphor {

// One cross-domain association: the source noun mapped onto a target cluster
// it does not belong to.
struct MetaphorMapping {
  std::string source;
  Index level = 0;
  Index rank = 0;        // 1-based, contiguous within one query
  Index cluster_id = 0;  // id of the target cluster at that level
  double score = 0.0;    // soft-assignment probability
  std::vector<std::string> members;
};

struct RankedCluster {
  Index cluster_id = 0;
  double probability = 0.0;
  std::vector<Index> members;  // noun indices, ascending
};

// Explicit clusters of a level ordered by the source noun's soft-assignment
// probability, highest first, ties to the smaller cluster id.
std::vector<RankedCluster> rank_clusters(const ConceptGraph& graph, std::string_view source,
                                         Index level);

struct QueryOptions {
  Index level = 3;
  Index top_k = 6;
  // false: take top_k clusters, then drop the literal one (may return fewer);
  // true: keep collecting past the literal cluster until top_k targets remain.
  bool exact_targets = false;
};

struct QueryResult {
  std::vector<MetaphorMapping> mappings;
  std::string diagnostic;  // set when mappings is empty for a known reason
};

QueryResult identify_metaphors(const ConceptGraph& graph, std::string_view source,
                               const QueryOptions& options = {});

struct SourceSummary {
  std::string source;
  Index mapping_count = 0;
  std::string note;  // skip reason or empty-result diagnostic
};

struct BatchResult {
  std::vector<MetaphorMapping> mappings;  // source order, then rank
  std::vector<SourceSummary> summary;
};

// Runs identify_metaphors over a source list: duplicates collapse to the
// first occurrence and unknown or featureless sources are noted and skipped.
BatchResult batch_identify(const ConceptGraph& graph, const std::vector<std::string>& sources,
                           const QueryOptions& options = {});

// Turns a ranked cluster list into mappings under the top-k and literal-
// cluster exclusion rules. Shared by both clustering systems.
QueryResult select_targets(const std::vector<RankedCluster>& ranked, const NounLexicon& lexicon,
                           std::string_view source, Index source_index,
                           const QueryOptions& options);

// Batch plumbing shared by both systems: dedupe sources, run the per-source
// query, turn per-source data errors into skip notes.
template <typename QueryFn>
BatchResult run_batch(const std::vector<std::string>& sources, QueryFn&& query) {
  BatchResult result;
  std::set<std::string> seen;
  for (const auto& source : sources) {
    if (!seen.insert(source).second) continue;
    SourceSummary summary;
    summary.source = source;
    try {
      QueryResult one = query(source);
      summary.mapping_count = static_cast<Index>(one.mappings.size());
      summary.note = one.diagnostic;
      for (auto& mapping : one.mappings) result.mappings.push_back(std::move(mapping));
    } catch (const data_error& e) {
      summary.note = std::string("skipped: ") + e.what();
    }
    result.summary.push_back(std::move(summary));
  }
  return result;
}

}  // namespace metaphor
