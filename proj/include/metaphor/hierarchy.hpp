#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "metaphor/factorization.hpp"
#include "metaphor/ingestion.hpp"
#include "metaphor/similarity.hpp"

namespace metaphor {

struct HierarchyOptions {
  Index m1 = 800;
  int max_iterations = 1000;
  double tol = 1e-7;
  int tol_streak = 10;
  std::uint64_t seed = 0;
};

// One stacked level. `factor` clusters the level's input graph (nouns for
// level 1, the previous level's clusters above that); `transition` is the
// row-normalized bipartite adjacency D^-1 B feeding the assignment chain.
struct HierarchyLevel {
  Factorization<double> factor;
  Matrix<double> transition;
  std::vector<Index> hard_parent;  // argmax of B per input node, kUnassigned for zero rows
  Index non_empty = 0;             // clusters reached by at least one noun's hard chain
};

struct ConceptGraph {
  NounLexicon lexicon;
  std::vector<Index> flagged;  // noun rows excluded from clustering
  std::vector<HierarchyLevel> levels;
  HierarchyOptions options;

  Index depth() const { return static_cast<Index>(levels.size()); }
  Index clusters_at(Index level) const;  // levels count from 1 next to the nouns
  const HierarchyLevel& level(Index level) const;

  // Hard cluster of every noun at the given level, following argmax parents
  // upward from level 1. Flagged nouns stay kUnassigned.
  std::vector<Index> noun_chain(Index level) const;
};

// Stacks factorizations until a level has a single cluster: each level gets
// one fewer cluster than the previous level has non-empty ones, and the next
// input graph is the cluster similarity of the current bipartite adjacency.
ConceptGraph build_hierarchy(const SimilarityMatrix& similarity, const HierarchyOptions& options);

// Probability distribution of a noun over the clusters of a level: the noun's
// row of the chained product of per-level transitions. Sums to 1.
Vector<double> soft_assignment(const ConceptGraph& graph, std::string_view noun, Index level);

// Resolves a usable noun row or fails, suggesting lexicon entries within edit
// distance 2 for unknown nouns and refusing flagged ones.
Index resolve_noun(const NounLexicon& lexicon, const std::vector<Index>& flagged,
                   std::string_view noun);

void check_level(const ConceptGraph& graph, Index level);

struct ExplicitCluster {
  Index cluster_id = 0;          // id within the level's factorization
  std::vector<Index> members;    // noun indices, ascending
};

struct ExplicitLevel {
  std::vector<ExplicitCluster> clusters;  // ascending by cluster_id
  // Bipartite weights to the next explicit level, rows matching `clusters`
  // here and columns the level above. Empty at the top level.
  Matrix<double> up;
};

// The hierarchy with empty clusters hidden: only clusters that own at least
// one noun through the hard-assignment chain survive.
struct ExplicitGraph {
  std::vector<ExplicitLevel> levels;
};

ExplicitGraph explicit_view(const ConceptGraph& graph);

}  // namespace metaphor
