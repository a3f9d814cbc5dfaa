#include "metaphor/agglomerative.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace metaphor {

namespace {

// Leaf-restricted gram matrix of the feature rows, for squared Euclidean
// distances d2(i,j) = g(i,i) + g(j,j) - 2 g(i,j).
Matrix<double> leaf_gram(const FeatureMatrix& features, const std::vector<Index>& leaves) {
  const Index n = static_cast<Index>(leaves.size());
  Matrix<double> gram(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = a; b < n; ++b) {
      double dot = 0.0;
      SparseRowMatrix::InnerIterator ia(features.values, leaves[static_cast<std::size_t>(a)]);
      SparseRowMatrix::InnerIterator ib(features.values, leaves[static_cast<std::size_t>(b)]);
      while (ia && ib) {
        if (ia.col() < ib.col()) ++ia;
        else if (ib.col() < ia.col()) ++ib;
        else {
          dot += ia.value() * ib.value();
          ++ia;
          ++ib;
        }
      }
      gram(a, b) = dot;
      gram(b, a) = dot;
    }
  }
  return gram;
}

}  // namespace

Dendrogram ward_cluster(const FeatureMatrix& features) {
  Dendrogram out;
  for (Index i = 0; i < features.rows(); ++i) {
    if (!features.is_flagged(i)) out.leaves.push_back(i);
  }
  const Index n = static_cast<Index>(out.leaves.size());
  if (n < 2) {
    throw data_error("need at least 2 nouns with features to cluster, got " + std::to_string(n));
  }

  const Matrix<double> gram = leaf_gram(features, out.leaves);
  Matrix<double> d2(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      d2(a, b) = std::max(gram(a, a) + gram(b, b) - 2.0 * gram(a, b), 0.0);
    }
  }

  std::vector<Index> slots(static_cast<std::size_t>(n));  // active slots into d2
  std::iota(slots.begin(), slots.end(), Index(0));
  std::vector<Index> node_id(static_cast<std::size_t>(n));
  std::iota(node_id.begin(), node_id.end(), Index(0));
  std::vector<Index> size(static_cast<std::size_t>(n), 1);

  out.merges.reserve(static_cast<std::size_t>(n - 1));
  for (Index step = 0; step < n - 1; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_a = 0;
    std::size_t best_b = 0;
    std::pair<Index, Index> best_ids{0, 0};
    for (std::size_t a = 0; a < slots.size(); ++a) {
      for (std::size_t b = a + 1; b < slots.size(); ++b) {
        const double cost = d2(slots[a], slots[b]);
        const std::pair<Index, Index> ids =
            std::minmax(node_id[static_cast<std::size_t>(slots[a])],
                        node_id[static_cast<std::size_t>(slots[b])]);
        if (cost < best || (cost == best && ids < best_ids)) {
          best = cost;
          best_a = a;
          best_b = b;
          best_ids = ids;
        }
      }
    }

    const Index sa = slots[best_a];
    const Index sb = slots[best_b];
    const Index na = size[static_cast<std::size_t>(sa)];
    const Index nb = size[static_cast<std::size_t>(sb)];
    const Index merged_id = n + step;
    out.merges.push_back({best_ids.first, best_ids.second, best, merged_id});

    // Lance-Williams update for Ward, into slot sa.
    for (std::size_t k = 0; k < slots.size(); ++k) {
      if (k == best_a || k == best_b) continue;
      const Index sk = slots[k];
      const Index nk = size[static_cast<std::size_t>(sk)];
      const double updated = ((static_cast<double>(na + nk) * d2(sk, sa)) +
                              (static_cast<double>(nb + nk) * d2(sk, sb)) -
                              (static_cast<double>(nk) * best)) /
                             static_cast<double>(na + nb + nk);
      d2(sk, sa) = updated;
      d2(sa, sk) = updated;
    }
    node_id[static_cast<std::size_t>(sa)] = merged_id;
    size[static_cast<std::size_t>(sa)] = na + nb;
    slots.erase(slots.begin() + static_cast<std::ptrdiff_t>(best_b));
  }
  return out;
}

std::vector<Partition> cut_to_shape(const Dendrogram& dendrogram,
                                    const std::vector<Index>& level_sizes) {
  const Index n = static_cast<Index>(dendrogram.leaves.size());
  for (std::size_t l = 0; l < level_sizes.size(); ++l) {
    if (level_sizes[l] < 1 || level_sizes[l] > n) {
      throw data_error("cut size " + std::to_string(level_sizes[l]) + " out of range 1.." +
                       std::to_string(n));
    }
    if (l > 0 && level_sizes[l] > level_sizes[l - 1]) {
      throw data_error("cut sizes must be non-increasing bottom-up");
    }
  }

  std::vector<Partition> stack;
  stack.reserve(level_sizes.size());
  for (const Index target : level_sizes) {
    // Union-find over the first n - target merges.
    std::vector<Index> parent(static_cast<std::size_t>(2 * n - 1));
    std::iota(parent.begin(), parent.end(), Index(0));
    auto find = [&parent](Index x) {
      while (parent[static_cast<std::size_t>(x)] != x) {
        x = parent[static_cast<std::size_t>(x)] =
            parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      }
      return x;
    };
    for (Index t = 0; t < n - target; ++t) {
      const Merge& m = dendrogram.merges[static_cast<std::size_t>(t)];
      parent[static_cast<std::size_t>(find(m.left))] = m.id;
      parent[static_cast<std::size_t>(find(m.right))] = m.id;
    }
    std::map<Index, std::vector<Index>> groups;  // root -> lexicon rows, leaf order
    for (Index leaf = 0; leaf < n; ++leaf) {
      groups[find(leaf)].push_back(dendrogram.leaves[static_cast<std::size_t>(leaf)]);
    }
    Partition partition;
    partition.reserve(groups.size());
    for (auto& [root, members] : groups) partition.push_back(std::move(members));
    std::sort(partition.begin(), partition.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    stack.push_back(std::move(partition));
  }
  return stack;
}

BaselineGraph baseline_graph(const std::vector<Partition>& stack, const FeatureMatrix& features) {
  BaselineGraph graph;
  graph.features = features;
  graph.levels.resize(stack.size());

  for (std::size_t l = 0; l < stack.size(); ++l) {
    BaselineLevel& level = graph.levels[l];
    level.clusters = stack[l];
    const Index k = static_cast<Index>(level.clusters.size());
    level.centroids.resize(k, features.cols());
    std::vector<Eigen::Triplet<double>> triplets;
    for (Index c = 0; c < k; ++c) {
      std::map<Index, double> sums;
      for (Index row : level.clusters[static_cast<std::size_t>(c)]) {
        for (SparseRowMatrix::InnerIterator it(features.values, row); it; ++it) {
          sums[it.col()] += it.value();
        }
      }
      double total = 0.0;
      for (const auto& [col, value] : sums) total += value;
      if (total <= 0.0) continue;
      for (const auto& [col, value] : sums) {
        triplets.emplace_back(static_cast<int>(c), static_cast<int>(col), value / total);
      }
    }
    level.centroids.setFromTriplets(triplets.begin(), triplets.end());
    level.centroids.makeCompressed();
  }

  for (std::size_t l = 0; l + 1 < graph.levels.size(); ++l) {
    BaselineLevel& lower = graph.levels[l];
    const BaselineLevel& upper = graph.levels[l + 1];
    lower.up.resize(lower.centroids.rows(), upper.centroids.rows());
    for (Index c = 0; c < lower.centroids.rows(); ++c) {
      for (Index p = 0; p < upper.centroids.rows(); ++p) {
        lower.up(c, p) = 1.0 - jsd_sparse_rows(lower.centroids, c, upper.centroids, p);
      }
    }
  }
  return graph;
}

namespace {

void check_baseline_level(const BaselineGraph& graph, Index level) {
  if (level < 1 || level > graph.depth()) {
    throw data_error("level " + std::to_string(level) + " out of range; available levels are 1.." +
                     std::to_string(graph.depth()));
  }
}

Eigen::RowVectorXd normalized_rows(const Eigen::RowVectorXd& v) {
  const double sum = v.sum();
  if (sum <= 0.0) return Eigen::RowVectorXd::Zero(v.size());
  return v / sum;
}

}  // namespace

Vector<double> baseline_soft_assignment(const BaselineGraph& graph, std::string_view noun,
                                        Index level) {
  check_baseline_level(graph, level);
  const Index row = resolve_noun(graph.features.lexicon, graph.features.flagged, noun);

  const BaselineLevel& base = graph.levels[0];
  Eigen::RowVectorXd v(base.centroids.rows());
  for (Index c = 0; c < base.centroids.rows(); ++c) {
    v(c) = 1.0 - jsd_sparse_rows(graph.features.values, row, base.centroids, c);
  }
  v = normalized_rows(v);
  for (Index l = 2; l <= level; ++l) {
    const Matrix<double>& up = graph.levels[static_cast<std::size_t>(l - 2)].up;
    Matrix<double> transition = up;
    for (Index r = 0; r < up.rows(); ++r) {
      transition.row(r) = normalized_rows(up.row(r));
    }
    v = v * transition;
  }
  return v.transpose();
}

QueryResult baseline_rank(const BaselineGraph& graph, std::string_view source,
                          const QueryOptions& options) {
  check_baseline_level(graph, options.level);
  if (options.top_k < 1) {
    throw data_error("top-k must be at least 1, got " + std::to_string(options.top_k));
  }
  const Index source_index = resolve_noun(graph.features.lexicon, graph.features.flagged, source);
  const Vector<double> soft = baseline_soft_assignment(graph, source, options.level);

  const BaselineLevel& level = graph.levels[static_cast<std::size_t>(options.level - 1)];
  std::vector<RankedCluster> ranked;
  ranked.reserve(level.clusters.size());
  for (std::size_t c = 0; c < level.clusters.size(); ++c) {
    ranked.push_back({static_cast<Index>(c), soft(static_cast<Index>(c)), level.clusters[c]});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedCluster& a, const RankedCluster& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.cluster_id < b.cluster_id;
  });
  return select_targets(ranked, graph.features.lexicon, source, source_index, options);
}

BatchResult baseline_batch(const BaselineGraph& graph, const std::vector<std::string>& sources,
                           const QueryOptions& options) {
  check_baseline_level(graph, options.level);
  if (options.top_k < 1) {
    throw data_error("top-k must be at least 1, got " + std::to_string(options.top_k));
  }
  return run_batch(sources,
                   [&](const std::string& source) { return baseline_rank(graph, source, options); });
}

}  // namespace metaphor
