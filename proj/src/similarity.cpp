#include "metaphor/similarity.hpp"

#include <algorithm>
#include <cmath>

namespace metaphor {

double jsd_sparse_rows(const SparseRowMatrix& ma, Index row_a, const SparseRowMatrix& mb,
                       Index row_b) {
  KahanSum<double> acc;
  SparseRowMatrix::InnerIterator ia(ma, row_a);
  SparseRowMatrix::InnerIterator ib(mb, row_b);
  while (ia || ib) {
    double p = 0.0;
    double q = 0.0;
    if (ia && (!ib || ia.col() < ib.col())) {
      p = ia.value();
      ++ia;
    } else if (ib && (!ia || ib.col() < ia.col())) {
      q = ib.value();
      ++ib;
    } else {
      p = ia.value();
      q = ib.value();
      ++ia;
      ++ib;
    }
    const double mid = (p + q) / 2.0;
    if (mid <= 0.0) continue;
    acc.add(detail::xlog2x_over(p, mid) + detail::xlog2x_over(q, mid));
  }
  return std::clamp(acc.value() / 2.0, 0.0, 1.0);
}

double jsd_sparse_rows(const SparseRowMatrix& m, Index row_a, Index row_b) {
  return jsd_sparse_rows(m, row_a, m, row_b);
}

SimilarityMatrix similarity_matrix(const FeatureMatrix& features) {
  const Index n = features.rows();
  const Index usable = n - static_cast<Index>(features.flagged.size());
  if (usable < 2) {
    throw data_error("need at least 2 nouns with features to build a similarity graph, got " +
                     std::to_string(usable));
  }
  for (Index i = 0; i < n; ++i) {
    if (features.is_flagged(i)) continue;
    const double sum = features.values.row(i).sum();
    if (std::abs(sum - 1.0) > 1e-9) {
      throw data_error("feature row for '" + features.lexicon.noun(i) + "' sums to " +
                       std::to_string(sum) + ", expected 1");
    }
  }

  SimilarityMatrix out;
  out.values = Matrix<double>::Zero(n, n);
  out.lexicon = features.lexicon;
  out.flagged = features.flagged;
  for (Index i = 0; i < n; ++i) {
    if (features.is_flagged(i)) continue;
    out.values(i, i) = 1.0;
    for (Index j = i + 1; j < n; ++j) {
      if (features.is_flagged(j)) continue;
      const double s = 1.0 - jsd_sparse_rows(features.values, i, j);
      out.values(i, j) = s;
      out.values(j, i) = s;
    }
  }
  return out;
}

}  // namespace metaphor
