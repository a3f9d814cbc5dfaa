#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "metaphor/common.hpp"
#include "metaphor/ingestion.hpp"

namespace metaphor {

namespace detail {

// x log2(x/m) with the 0 log 0 = 0 convention; m is the mixture weight.
template <typename Scalar>
Scalar xlog2x_over(Scalar x, Scalar m) {
  if (x <= Scalar(0)) return Scalar(0);
  return x * std::log2(x / m);
}

template <typename Derived>
void check_distribution(const Eigen::DenseBase<Derived>& p, const char* which) {
  using Scalar = typename Derived::Scalar;
  if ((p.derived().array() < Scalar(0)).any()) {
    throw data_error(std::string(which) + " distribution has a negative entry");
  }
  const Scalar sum = p.derived().sum();
  if (std::abs(sum - Scalar(1)) > Scalar(1e-9)) {
    throw data_error(std::string(which) + " distribution sums to " + std::to_string(double(sum)) +
                     ", expected 1");
  }
}

}  // namespace detail

// Jensen-Shannon divergence, log base 2, so the value lies in [0, 1].
// Both arguments must be probability vectors of equal length.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar jsd(const Eigen::DenseBase<DerivedP>& p,
                              const Eigen::DenseBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  if (p.size() != q.size()) {
    throw data_error("jsd: length mismatch: " + std::to_string(p.size()) + " vs " +
                     std::to_string(q.size()));
  }
  detail::check_distribution(p, "first");
  detail::check_distribution(q, "second");
  KahanSum<Scalar> acc;
  for (Index i = 0; i < p.size(); ++i) {
    const Scalar pi = p.derived()(i);
    const Scalar qi = q.derived()(i);
    const Scalar mi = (pi + qi) / Scalar(2);
    if (mi <= Scalar(0)) continue;
    // One add per index keeps the sum exactly symmetric under argument swap.
    acc.add(detail::xlog2x_over(pi, mi) + detail::xlog2x_over(qi, mi));
  }
  Scalar value = acc.value() / Scalar(2);
  if (value < Scalar(0)) value = Scalar(0);
  if (value > Scalar(1)) value = Scalar(1);
  return value;
}

// JSD over two sparse relative-frequency rows, walking the union of their
// supports so untouched columns never cost anything. The rows may come from
// two different matrices over the same column space.
double jsd_sparse_rows(const SparseRowMatrix& ma, Index row_a, const SparseRowMatrix& mb,
                       Index row_b);
double jsd_sparse_rows(const SparseRowMatrix& m, Index row_a, Index row_b);

// Symmetric noun-noun similarity 1 - JSD. Flagged nouns keep zero rows and
// columns (self included); everything else has a unit diagonal.
struct SimilarityMatrix {
  Matrix<double> values;
  NounLexicon lexicon;  // row i is lexicon.noun(i)
  std::vector<Index> flagged;
};

SimilarityMatrix similarity_matrix(const FeatureMatrix& features);

}  // namespace metaphor
