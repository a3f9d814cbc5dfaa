#include "metaphor/hierarchy.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace metaphor {

void check_level(const ConceptGraph& graph, Index level) {
  if (level < 1 || level > graph.depth()) {
    throw data_error("level " + std::to_string(level) + " out of range; available levels are 1.." +
                     std::to_string(graph.depth()));
  }
}

Index ConceptGraph::clusters_at(Index level) const {
  check_level(*this, level);
  return levels[static_cast<std::size_t>(level - 1)].factor.clusters();
}

const HierarchyLevel& ConceptGraph::level(Index level) const {
  check_level(*this, level);
  return levels[static_cast<std::size_t>(level - 1)];
}

std::vector<Index> ConceptGraph::noun_chain(Index target) const {
  check_level(*this, target);
  std::vector<Index> chain = levels[0].hard_parent;
  for (Index l = 2; l <= target; ++l) {
    const auto& parent = levels[static_cast<std::size_t>(l - 1)].hard_parent;
    for (auto& c : chain) {
      if (c != kUnassigned) c = parent[static_cast<std::size_t>(c)];
    }
  }
  return chain;
}

namespace {

Index distinct_assigned(const std::vector<Index>& chain, Index clusters) {
  std::vector<char> seen(static_cast<std::size_t>(clusters), 0);
  Index count = 0;
  for (Index c : chain) {
    if (c == kUnassigned) continue;
    if (!seen[static_cast<std::size_t>(c)]) {
      seen[static_cast<std::size_t>(c)] = 1;
      ++count;
    }
  }
  return count;
}

}  // namespace

ConceptGraph build_hierarchy(const SimilarityMatrix& similarity, const HierarchyOptions& options) {
  if (options.m1 < 2) {
    throw data_error("m1 must be at least 2, got " + std::to_string(options.m1));
  }
  ConceptGraph graph;
  graph.lexicon = similarity.lexicon;
  graph.flagged = similarity.flagged;
  graph.options = options;

  Matrix<double> w = similarity.values;
  Index m = options.m1;
  std::vector<Index> chain;  // per-noun cluster at the level being built
  for (Index level = 1;; ++level) {
    FactorizeOptions fo;
    fo.max_iterations = options.max_iterations;
    fo.tol = options.tol;
    fo.tol_streak = options.tol_streak;
    fo.seed = options.seed + static_cast<std::uint64_t>(level - 1);

    HierarchyLevel built;
    try {
      built.factor = factorize(w, m, fo);
    } catch (const numerical_error& e) {
      throw numerical_error("level " + std::to_string(level) + ": " + e.what());
    }

    const Matrix<double> b = adjacency(built.factor);
    built.hard_parent = hard_assignments(b);
    built.transition = b;
    for (Index i = 0; i < b.rows(); ++i) {
      const double d = b.row(i).sum();
      if (d > 0.0) built.transition.row(i) /= d;
      else built.transition.row(i).setZero();
    }

    if (level == 1) {
      chain = built.hard_parent;
    } else {
      for (auto& c : chain) {
        if (c != kUnassigned) c = built.hard_parent[static_cast<std::size_t>(c)];
      }
    }
    built.non_empty = distinct_assigned(chain, m);
    graph.levels.push_back(std::move(built));

    if (m == 1) break;  // the single-cluster top level was just built
    const Index next = graph.levels.back().non_empty - 1;
    if (next < 1) break;  // everything already sits in one cluster
    w = cluster_similarity(b);
    m = next;
  }
  return graph;
}

Index resolve_noun(const NounLexicon& lexicon, const std::vector<Index>& flagged,
                   std::string_view noun) {
  const auto index = lexicon.index_of(noun);
  if (!index) {
    std::vector<std::pair<std::size_t, std::string>> nearby;
    for (const auto& candidate : lexicon.nouns()) {
      const std::size_t d = edit_distance(noun, candidate);
      if (d <= 2) nearby.emplace_back(d, candidate);
    }
    std::sort(nearby.begin(), nearby.end());
    std::string msg = "unknown noun '" + std::string(noun) + "'";
    if (!nearby.empty()) {
      msg += "; nearby entries:";
      const std::size_t shown = std::min<std::size_t>(nearby.size(), 5);
      for (std::size_t i = 0; i < shown; ++i) msg += (i ? ", " : " ") + nearby[i].second;
    }
    throw data_error(msg);
  }
  if (std::binary_search(flagged.begin(), flagged.end(), *index)) {
    throw data_error("noun '" + std::string(noun) +
                     "' has no usable features and was excluded from clustering");
  }
  return *index;
}

Vector<double> soft_assignment(const ConceptGraph& graph, std::string_view noun, Index level) {
  check_level(graph, level);
  const Index i = resolve_noun(graph.lexicon, graph.flagged, noun);
  Eigen::RowVectorXd v = graph.levels[0].transition.row(i);
  for (Index l = 2; l <= level; ++l) {
    v = v * graph.levels[static_cast<std::size_t>(l - 1)].transition;
  }
  return v.transpose();
}

ExplicitGraph explicit_view(const ConceptGraph& graph) {
  ExplicitGraph out;
  const Index depth = graph.depth();
  out.levels.resize(static_cast<std::size_t>(depth));

  std::vector<Index> chain;
  for (Index level = 1; level <= depth; ++level) {
    const auto& built = graph.levels[static_cast<std::size_t>(level - 1)];
    if (level == 1) {
      chain = built.hard_parent;
    } else {
      for (auto& c : chain) {
        if (c != kUnassigned) c = built.hard_parent[static_cast<std::size_t>(c)];
      }
    }
    std::map<Index, std::vector<Index>> buckets;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      if (chain[i] != kUnassigned) buckets[chain[i]].push_back(static_cast<Index>(i));
    }
    auto& explicit_level = out.levels[static_cast<std::size_t>(level - 1)];
    explicit_level.clusters.reserve(buckets.size());
    for (auto& [cluster_id, members] : buckets) {
      explicit_level.clusters.push_back({cluster_id, std::move(members)});
    }
  }

  for (Index level = 1; level < depth; ++level) {
    auto& lower = out.levels[static_cast<std::size_t>(level - 1)];
    const auto& upper = out.levels[static_cast<std::size_t>(level)];
    const Matrix<double> b = adjacency(graph.levels[static_cast<std::size_t>(level)].factor);
    lower.up.resize(static_cast<Index>(lower.clusters.size()),
                    static_cast<Index>(upper.clusters.size()));
    for (std::size_t r = 0; r < lower.clusters.size(); ++r) {
      for (std::size_t c = 0; c < upper.clusters.size(); ++c) {
        lower.up(static_cast<Index>(r), static_cast<Index>(c)) =
            b(lower.clusters[r].cluster_id, upper.clusters[c].cluster_id);
      }
    }
  }
  return out;
}

}  // namespace metaphor
