#pragma once

#include <string_view>
#include <vector>

#include "metaphor/association.hpp"
#include "metaphor/ingestion.hpp"

namespace metaphor {

struct Merge {
  Index left = 0;    // smaller of the two merged node ids
  Index right = 0;   // larger of the two
  double cost = 0;   // Ward distance on the squared Euclidean scale
  Index id = 0;      // id of the merged node (n + merge position)
};

// Agglomeration record over the non-flagged nouns. Leaf node i is the noun at
// lexicon row leaves[i]; merged nodes continue the id sequence upward.
struct Dendrogram {
  std::vector<Index> leaves;
  std::vector<Merge> merges;  // n-1 entries, costs non-decreasing
};

// Ward minimum-variance clustering over Euclidean distance between feature
// rows, ties on cost broken by the smallest (left, right) id pair.
Dendrogram ward_cluster(const FeatureMatrix& features);

// Clusters of one cut level; members are lexicon rows, each list ascending,
// clusters ordered by their smallest member.
using Partition = std::vector<std::vector<Index>>;

// One partition per requested size, bottom-up. Size k is the state of the
// agglomeration with the last k-1 merges undone, so the levels nest.
std::vector<Partition> cut_to_shape(const Dendrogram& dendrogram,
                                    const std::vector<Index>& level_sizes);

struct BaselineLevel {
  std::vector<std::vector<Index>> clusters;
  SparseRowMatrix centroids;  // one renormalized mean distribution per cluster
  Matrix<double> up;          // 1 - jsd to each cluster one level above; empty at the top
};

// The agglomerative counterpart of the factorized hierarchy: same level
// shape, with centroid-similarity connections between consecutive levels.
struct BaselineGraph {
  FeatureMatrix features;  // kept for noun-to-cluster weights at query time
  std::vector<BaselineLevel> levels;

  Index depth() const { return static_cast<Index>(levels.size()); }
};

BaselineGraph baseline_graph(const std::vector<Partition>& stack, const FeatureMatrix& features);

// Soft assignment of a noun over a baseline level: 1 - jsd weights from the
// noun to the first level's centroids, row-normalized, then chained through
// the row-normalized inter-level weights.
Vector<double> baseline_soft_assignment(const BaselineGraph& graph, std::string_view noun,
                                        Index level);

QueryResult baseline_rank(const BaselineGraph& graph, std::string_view source,
                          const QueryOptions& options = {});

BatchResult baseline_batch(const BaselineGraph& graph, const std::vector<std::string>& sources,
                           const QueryOptions& options = {});

}  // namespace metaphor
