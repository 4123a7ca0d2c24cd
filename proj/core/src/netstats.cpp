#include "star/netstats.hpp"

#include <algorithm>

#include "star/errors.hpp"

namespace star {

const std::vector<std::string>& directed_stat_names() {
  static const std::vector<std::string> names = {"out_degree",    "in_degree",     "stability",
                                                 "reciprocity",   "transitivity1", "transitivity2",
                                                 "transitivity3", "cycle"};
  return names;
}

const std::vector<std::string>& undirected_stat_names() {
  static const std::vector<std::string> names = {"degree", "stability", "triangle"};
  return names;
}

namespace {

Matrix directed_slice(const std::string& name, const Matrix& A) {
  const auto n = A.rows();
  const Matrix J = Matrix::Ones(n, n);
  if (name == "out_degree") return A * J;
  if (name == "in_degree") return J * A;
  if (name == "stability") return A;
  if (name == "reciprocity") return A.transpose();
  if (name == "transitivity1") return A * A;
  if (name == "transitivity2") return A * A.transpose();
  if (name == "transitivity3") return A.transpose() * A;
  if (name == "cycle") return A.transpose() * A.transpose();
  throw ValidationError("unknown directed stat name: " + name);
}

void require_symmetric(const Matrix& A, const char* who) {
  if (!A.isApprox(A.transpose()))
    throw ValidationError(std::string(who) + ": snapshot is not symmetric");
}

}  // namespace

LagStatTensor build_lag_stats_directed(const Matrix& A_prev, const std::vector<std::string>& selection) {
  if (A_prev.rows() < 2 || A_prev.rows() != A_prev.cols())
    throw ValidationError("build_lag_stats_directed: bad snapshot shape");
  Matrix A = A_prev;
  A.diagonal().setZero();
  LagStatTensor out;
  for (const auto& name : selection) {
    out.slices.push_back(directed_slice(name, A));
    out.labels.push_back(name);
  }
  return out;
}

LagStatTensor build_lag_stats_undirected(const Matrix& A_prev) {
  require_symmetric(A_prev, "build_lag_stats_undirected");
  Matrix A = A_prev;
  A.diagonal().setZero();
  const auto n = A.rows();
  const Matrix J = Matrix::Ones(n, n);
  LagStatTensor out;
  out.slices = {A * J + J * A, A, A * A};
  out.labels = undirected_stat_names();
  return out;
}

LagStatTensor build_lag_stats(const DynamicNetwork& net, int t, const std::vector<std::string>& selection,
                              int lag_depth) {
  if (lag_depth < 1) throw ValidationError("lag_depth must be >= 1");
  if (t < lag_depth || t > net.step_count())
    throw ValidationError("build_lag_stats: t=" + std::to_string(t) + " out of range for lag_depth=" +
                          std::to_string(lag_depth));
  LagStatTensor out;
  for (int lag = 1; lag <= lag_depth; ++lag) {
    const Matrix& A = net.snapshots[static_cast<std::size_t>(t - lag)];
    LagStatTensor one = net.directed ? build_lag_stats_directed(A, selection) : build_lag_stats_undirected(A);
    for (std::size_t l = 0; l < one.slices.size(); ++l) {
      out.slices.push_back(std::move(one.slices[l]));
      out.labels.push_back(lag == 1 ? one.labels[l] : one.labels[l] + "_lag" + std::to_string(lag));
    }
  }
  return out;
}

CovarianceBases build_H_directed(const Matrix& A_prev) {
  const auto n = A_prev.rows();
  if (n < 2 || A_prev.cols() != n) throw ValidationError("build_H_directed: bad snapshot shape");
  Matrix A = A_prev;
  A.diagonal().setOnes();
  const Vector out_deg = A.rowwise().sum();
  const Vector in_deg = A.colwise().sum().transpose();
  const Vector dout = out_deg.array().rsqrt();
  const Vector din = in_deg.array().rsqrt();
  CovarianceBases bases;
  bases.sender = {Matrix::Identity(n, n), dout.asDiagonal() * (A * A.transpose()) * dout.asDiagonal()};
  bases.receiver = {Matrix::Identity(n, n), din.asDiagonal() * (A.transpose() * A) * din.asDiagonal()};
  bases.cross = {Matrix::Identity(n, n)};
  return bases;
}

CovarianceBases build_H_undirected(const Matrix& A_prev) {
  require_symmetric(A_prev, "build_H_undirected");
  const auto n = A_prev.rows();
  Matrix A = A_prev;
  A.diagonal().setOnes();
  const Vector deg = A.rowwise().sum();
  const Vector d = deg.array().rsqrt();
  CovarianceBases bases;
  bases.sender = {d.asDiagonal() * (A * A) * d.asDiagonal()};
  return bases;
}

Matrix build_reciprocal_swap(int n) {
  if (n < 2) throw ValidationError("build_reciprocal_swap: need n >= 2");
  Matrix M = Matrix::Zero(n * n, n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (i != j) M(j * n + i, i * n + j) = 1.0;
  return M;
}

DyadDesign build_Z_matrices(int n) {
  if (n < 2) throw ValidationError("build_Z_matrices: need n >= 2");
  const int nd = n * (n - 1);
  DyadDesign d;
  d.Z_s = Matrix::Zero(nd, n);
  d.Z_r = Matrix::Zero(nd, n);
  d.Z_rec = Matrix::Zero(nd, nd / 2);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      const int row = dyad_index(i, j, n);
      d.Z_s(row, i) = 1.0;
      d.Z_r(row, j) = 1.0;
      d.Z_rec(row, i > j ? pair_index(i, j, n) : pair_index(j, i, n)) = 1.0;
    }
  return d;
}

}  // namespace star
