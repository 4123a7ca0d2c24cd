#pragma once

#include <string>
#include <vector>

#include "star/network.hpp"

// Lagged-network structures feeding the mean and covariance of the model:
// the per-time stat tensor, the actor-similarity covariance bases, the
// reciprocal-pair swap matrix, and the GLMM design matrices.

namespace star {

/// Stat slices computed from a lagged snapshot, with their names.
struct LagStatTensor {
  std::vector<Matrix> slices;
  std::vector<std::string> labels;
};

/// Covariance bases: sender-similarity H_s, receiver-similarity H_r, and
/// sender-receiver cross bases H_sr. All sender/receiver bases are PSD.
struct CovarianceBases {
  std::vector<Matrix> sender;
  std::vector<Matrix> receiver;
  std::vector<Matrix> cross;
};

/// Stat names accepted for directed networks, in canonical order:
/// out_degree, in_degree, stability, reciprocity, transitivity1,
/// transitivity2, transitivity3, cycle.
const std::vector<std::string>& directed_stat_names();

/// Stat names for undirected networks: degree, stability, triangle.
const std::vector<std::string>& undirected_stat_names();

/// Builds the requested directed stat slices from the lagged snapshot.
/// A_prev's diagonal is treated as zero. Unknown names throw.
LagStatTensor build_lag_stats_directed(const Matrix& A_prev, const std::vector<std::string>& selection);

/// Undirected stats (degree, stability, triangle). A_prev must be symmetric.
LagStatTensor build_lag_stats_undirected(const Matrix& A_prev);

/// Stat tensor for the transition into time t, stacking the selected stats
/// over lags 1..lag_depth (labels get a "_lagL" suffix for L >= 2).
/// Requires t >= lag_depth.
LagStatTensor build_lag_stats(const DynamicNetwork& net, int t, const std::vector<std::string>& selection,
                              int lag_depth);

/// Directed covariance bases: sender = {I, degree-normalized shared-target
/// counts}, receiver = {I, shared-source counts}, cross = {I}. The lagged
/// snapshot's diagonal is forced to one inside the normalization so degrees
/// are strictly positive; the results have unit diagonal.
CovarianceBases build_H_directed(const Matrix& A_prev);

/// Undirected basis: single degree-normalized shared-neighbor matrix.
CovarianceBases build_H_undirected(const Matrix& A_prev);

/// n^2 x n^2 permutation-like matrix sending the vec position of dyad (i,j)
/// to that of (j,i); rows and columns of diagonal dyads are zero.
Matrix build_reciprocal_swap(int n);

/// GLMM design matrices on the vec_minus_diag dyad order.
///   Z_s (n(n-1) x n):        Z_s * s       = vec_minus_diag(s 1')
///   Z_r (n(n-1) x n):        Z_r * r       = vec_minus_diag(1 r')
///   Z_rec (n(n-1) x n(n-1)/2): maps pair effects to both ordered dyads.
struct DyadDesign {
  Matrix Z_s;
  Matrix Z_r;
  Matrix Z_rec;
};

DyadDesign build_Z_matrices(int n);

}  // namespace star
