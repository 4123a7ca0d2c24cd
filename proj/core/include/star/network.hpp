#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

// Core data model for discrete-time dyadic network data.
//
// Dyad vectorization convention used throughout the library: a square matrix M
// is flattened column by column while skipping the diagonal, so the entry for
// dyad (i,j) lands at position (n-1)*j + i - (i>j) (0-based). All design
// matrices, latent-state bookkeeping, and file formats share this one order.

namespace star {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Sequence of adjacency snapshots A_0..A_T over a fixed actor set.
/// Entries are 0/1 off the diagonal; diagonal entries are meaningless and
/// forced to zero at construction.
struct DynamicNetwork {
  std::vector<Matrix> snapshots;
  bool directed = true;
  /// Original actor labels (1..n when the input was already dense).
  std::vector<long> labels;

  int actor_count() const { return snapshots.empty() ? 0 : static_cast<int>(snapshots.front().rows()); }
  /// Number of transitions T (snapshots.size() - 1).
  int step_count() const { return static_cast<int>(snapshots.size()) - 1; }

  /// Validates shapes, binary entries, and symmetry for undirected data,
  /// zeroes diagonals, and fills default labels.
  static DynamicNetwork from_snapshots(std::vector<Matrix> snapshots, bool directed);
};

/// Dyadic covariates: slices[l][t-1] is the n x n matrix of covariate l at
/// time t, t = 1..T. Static covariates are replicated across t.
struct CovariateTensor {
  std::vector<std::vector<Matrix>> slices;
  std::vector<std::string> labels;

  int covariate_count() const { return static_cast<int>(slices.size()); }
  int step_count() const { return slices.empty() ? 0 : static_cast<int>(slices.front().size()); }

  void validate(int n, int T) const;
};

/// Column-stacks M while skipping the diagonal; result has length n(n-1).
Vector vec_minus_diag(const Matrix& M);

/// Inverse of vec_minus_diag; the reconstructed diagonal is zero.
Matrix unvec_minus_diag(const Vector& v, int n);

/// 0-based position of dyad (i,j) in the vec_minus_diag order.
inline int dyad_index(int i, int j, int n) { return (n - 1) * j + i - (i > j ? 1 : 0); }

/// Sum_l coeffs[l] * slices[l].
Matrix linear_combination(const Vector& coeffs, const std::vector<Matrix>& slices);

/// Unordered-pair vectorization for undirected data: lower-triangle entries
/// (i>j) stacked column by column, length n(n-1)/2.
Vector vec_lower_pairs(const Matrix& M);

/// Rebuilds a symmetric zero-diagonal matrix from its lower-pair vector.
Matrix unvec_lower_pairs(const Vector& v, int n);

/// 0-based position of pair {i,j}, i>j, in the vec_lower_pairs order.
inline int pair_index(int i, int j, int n) { return n * j - j * (j + 1) / 2 + i - j - 1; }

}  // namespace star
