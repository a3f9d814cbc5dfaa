#pragma once

#include <cmath>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "metaphor/common.hpp"

namespace metaphor {

// Bipartite factorization of a similarity graph W into cluster memberships and
// cluster masses, W ~= H diag(lambda) H^T, where every column of `membership`
// sums to 1 and the masses sum to the grand sum of W.
template <typename Scalar>
struct Factorization {
  Matrix<Scalar> membership;    // n x m
  Vector<Scalar> cluster_mass;  // m
  Scalar cost = Scalar(0);      // divergence at the final iterate
  int iterations = 0;
  bool converged = false;

  Index order() const { return membership.rows(); }
  Index clusters() const { return membership.cols(); }
};

struct FactorizeOptions {
  int max_iterations = 1000;
  double tol = 1e-7;   // relative change in cost
  int tol_streak = 10; // consecutive iterations under tol before stopping
  std::uint64_t seed = 0;
};

inline constexpr double kUpdateEps = 1e-12;
inline constexpr Index kUnassigned = -1;

namespace detail {

template <typename Scalar>
void check_graph(const Matrix<Scalar>& w, Index m) {
  if (w.rows() != w.cols()) {
    throw data_error("similarity graph must be square, got " + std::to_string(w.rows()) + " x " +
                     std::to_string(w.cols()));
  }
  if ((w.array() < Scalar(0)).any()) {
    throw data_error("similarity graph has a negative entry");
  }
  if (m < 1) {
    throw data_error("cluster count must be at least 1, got " + std::to_string(m));
  }
  if (!(w.sum() > Scalar(0))) {
    throw data_error("similarity graph has zero total weight");
  }
  if (m > w.rows()) {
    std::cerr << "warning: requesting " << m << " clusters for " << w.rows() << " nodes\n";
  }
}

}  // namespace detail

// Random column-stochastic start. Membership columns are filled column by
// column from uniform(0,1] draws and normalized; masses start equal, summing
// to the grand sum of W.
template <typename Scalar>
Factorization<Scalar> init_factorization(const Matrix<Scalar>& w, Index m, std::uint64_t seed) {
  detail::check_graph(w, m);
  const Index n = w.rows();
  std::mt19937_64 rng(seed);
  Factorization<Scalar> f;
  f.membership.resize(n, m);
  for (Index p = 0; p < m; ++p) {
    for (Index i = 0; i < n; ++i) f.membership(i, p) = Scalar(uniform01(rng));
    f.membership.col(p) /= f.membership.col(p).sum();
  }
  f.cluster_mass = Vector<Scalar>::Constant(m, w.sum() / Scalar(m));
  return f;
}

// Generalized KL divergence zeta(W, H diag(lambda) H^T), accumulated in
// row-major order with compensated summation so the value is independent of
// how Eigen would block a reduction.
template <typename Scalar>
Scalar divergence_cost(const Matrix<Scalar>& w, const Matrix<Scalar>& membership,
                       const Vector<Scalar>& cluster_mass) {
  const Matrix<Scalar> y =
      (membership * cluster_mass.asDiagonal() * membership.transpose()).eval();
  KahanSum<Scalar> acc;
  for (Index i = 0; i < w.rows(); ++i) {
    for (Index j = 0; j < w.cols(); ++j) {
      const Scalar wij = w(i, j);
      const Scalar yij = y(i, j);
      if (wij > Scalar(0)) {
        const Scalar safe = std::max(yij, Scalar(kUpdateEps));
        acc.add(wij * std::log(wij / safe) - wij + yij);
      } else if (yij > Scalar(0)) {
        acc.add(yij);
      }
    }
  }
  return acc.value();
}

// One multiplicative update pass: memberships first against the current
// approximation, then masses against the refreshed one. Both constraint
// normalizations are reapplied exactly, so the invariants hold after every
// call. A column whose update collapses to zero keeps its previous value.
template <typename Scalar>
void update_step(const Matrix<Scalar>& w, Matrix<Scalar>& membership,
                 Vector<Scalar>& cluster_mass) {
  const Index m = membership.cols();
  const Scalar total = w.sum();

  Matrix<Scalar> y = membership * cluster_mass.asDiagonal() * membership.transpose();
  Matrix<Scalar> ratio = (w.array() / y.array().max(Scalar(kUpdateEps))).matrix();
  Matrix<Scalar> scaled = ratio * membership * cluster_mass.asDiagonal();
  Matrix<Scalar> updated = (membership.array() * scaled.array()).matrix();
  for (Index p = 0; p < m; ++p) {
    const Scalar colsum = updated.col(p).sum();
    if (colsum > Scalar(0)) membership.col(p) = updated.col(p) / colsum;
  }

  y.noalias() = membership * cluster_mass.asDiagonal() * membership.transpose();
  ratio = (w.array() / y.array().max(Scalar(kUpdateEps))).matrix();
  const Matrix<Scalar> gram = membership.transpose() * ratio * membership;
  for (Index p = 0; p < m; ++p) cluster_mass(p) *= gram(p, p);
  const Scalar mass = cluster_mass.sum();
  if (mass > Scalar(0)) cluster_mass *= total / mass;
}

template <typename Scalar>
Factorization<Scalar> factorize(const Matrix<Scalar>& w, Index m,
                                const FactorizeOptions& options = {}) {
  Factorization<Scalar> f = init_factorization(w, m, options.seed);
  Scalar prev = divergence_cost(w, f.membership, f.cluster_mass);
  int streak = 0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    update_step(w, f.membership, f.cluster_mass);
    const Scalar cost = divergence_cost(w, f.membership, f.cluster_mass);
    if (!std::isfinite(cost)) {
      throw numerical_error("factorization produced a non-finite cost at iteration " +
                            std::to_string(it));
    }
    f.iterations = it;
    f.cost = cost;
    const Scalar change = std::abs(prev - cost);
    if (change <= Scalar(options.tol) * std::max(Scalar(1), std::abs(prev))) {
      if (++streak >= options.tol_streak) {
        f.converged = true;
        break;
      }
    } else {
      streak = 0;
    }
    prev = cost;
  }
  if (f.iterations == 0) f.cost = prev;  // max_iterations == 0
  return f;
}

// Bipartite adjacency B = H diag(lambda) between nodes and clusters.
template <typename Scalar>
Matrix<Scalar> adjacency(const Factorization<Scalar>& f) {
  return f.membership * f.cluster_mass.asDiagonal();
}

// The smoothed graph W' = H diag(lambda) H^T induced by the factorization.
template <typename Scalar>
Matrix<Scalar> induced_similarity(const Factorization<Scalar>& f) {
  return f.membership * f.cluster_mass.asDiagonal() * f.membership.transpose();
}

// Cluster-level similarity B^T D^-1 B where D holds the row sums of B. Rows
// with zero mass (detached nodes) are dropped with a note rather than divided
// by zero; sqrt scaling keeps the product exactly symmetric.
template <typename Scalar>
Matrix<Scalar> cluster_similarity(const Matrix<Scalar>& b) {
  Matrix<Scalar> scaled = b;
  Index dropped = 0;
  for (Index i = 0; i < b.rows(); ++i) {
    const Scalar d = b.row(i).sum();
    if (d > Scalar(0)) {
      scaled.row(i) /= std::sqrt(d);
    } else {
      scaled.row(i).setZero();
      ++dropped;
    }
  }
  if (dropped == b.rows()) throw data_error("cluster similarity: every row has zero mass");
  if (dropped > 0) {
    std::cerr << "note: cluster similarity dropped " << dropped << " zero-mass row"
              << (dropped == 1 ? "" : "s") << "\n";
  }
  return scaled.transpose() * scaled;
}

// Row-wise argmax of B; ties go to the lowest cluster index and all-zero rows
// come back as kUnassigned.
template <typename Scalar>
std::vector<Index> hard_assignments(const Matrix<Scalar>& b) {
  std::vector<Index> out(static_cast<std::size_t>(b.rows()), kUnassigned);
  for (Index i = 0; i < b.rows(); ++i) {
    Scalar best = Scalar(0);
    Index arg = kUnassigned;
    for (Index p = 0; p < b.cols(); ++p) {
      if (b(i, p) > best) {
        best = b(i, p);
        arg = p;
      }
    }
    out[static_cast<std::size_t>(i)] = arg;
  }
  return out;
}

// Number of clusters that attract at least one hard assignment.
inline Index non_empty_count(const std::vector<Index>& assignments, Index clusters) {
  std::vector<char> seen(static_cast<std::size_t>(clusters), 0);
  Index count = 0;
  for (Index a : assignments) {
    if (a == kUnassigned) continue;
    if (!seen[static_cast<std::size_t>(a)]) {
      seen[static_cast<std::size_t>(a)] = 1;
      ++count;
    }
  }
  return count;
}

}  // namespace metaphor
