#include "star/network.hpp"

#include <cmath>
#include <numeric>

#include "star/errors.hpp"

namespace star {

DynamicNetwork DynamicNetwork::from_snapshots(std::vector<Matrix> snapshots, bool directed) {
  if (snapshots.empty()) throw ValidationError("network needs at least one snapshot");
  const auto n = snapshots.front().rows();
  if (n < 2) throw ValidationError("network needs at least 2 actors");
  for (std::size_t t = 0; t < snapshots.size(); ++t) {
    Matrix& A = snapshots[t];
    if (A.rows() != n || A.cols() != n)
      throw ValidationError("snapshot " + std::to_string(t) + " is not " + std::to_string(n) + "x" +
                            std::to_string(n));
    A.diagonal().setZero();
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        if (i == j) continue;
        const double v = A(i, j);
        if (v != 0.0 && v != 1.0)
          throw ValidationError("snapshot " + std::to_string(t) + " entry (" + std::to_string(i + 1) +
                                "," + std::to_string(j + 1) + ") is not binary");
        if (!directed && v != A(j, i))
          throw ValidationError("snapshot " + std::to_string(t) + " is not symmetric at (" +
                                std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
      }
  }
  DynamicNetwork net;
  net.snapshots = std::move(snapshots);
  net.directed = directed;
  net.labels.resize(static_cast<std::size_t>(n));
  std::iota(net.labels.begin(), net.labels.end(), 1L);
  return net;
}

void CovariateTensor::validate(int n, int T) const {
  if (static_cast<int>(slices.size()) != covariate_count())
    throw ValidationError("covariate tensor inconsistent");
  for (std::size_t l = 0; l < slices.size(); ++l) {
    if (static_cast<int>(slices[l].size()) != T)
      throw ValidationError("covariate " + std::to_string(l + 1) + " has " +
                            std::to_string(slices[l].size()) + " time slices, expected " + std::to_string(T));
    for (int t = 0; t < T; ++t) {
      const Matrix& X = slices[l][static_cast<std::size_t>(t)];
      if (X.rows() != n || X.cols() != n)
        throw ValidationError("covariate " + std::to_string(l + 1) + " slice t=" + std::to_string(t + 1) +
                              " has wrong shape");
      if (!X.allFinite())
        throw ValidationError("covariate " + std::to_string(l + 1) + " slice t=" + std::to_string(t + 1) +
                              " has non-finite values");
    }
  }
}

Vector vec_minus_diag(const Matrix& M) {
  const Eigen::Index n = M.rows();
  if (M.cols() != n) throw ValidationError("vec_minus_diag: matrix is not square");
  if (n < 2) throw ValidationError("vec_minus_diag: need n >= 2");
  Vector v(n * (n - 1));
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j) v(k++) = M(i, j);
  return v;
}

Matrix unvec_minus_diag(const Vector& v, int n) {
  if (v.size() != static_cast<Eigen::Index>(n) * (n - 1))
    throw ValidationError("unvec_minus_diag: length " + std::to_string(v.size()) + " != n(n-1) for n=" +
                          std::to_string(n));
  Matrix M = Matrix::Zero(n, n);
  Eigen::Index k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (i != j) M(i, j) = v(k++);
  return M;
}

Matrix linear_combination(const Vector& coeffs, const std::vector<Matrix>& slices) {
  if (static_cast<std::size_t>(coeffs.size()) != slices.size())
    throw ValidationError("linear_combination: " + std::to_string(coeffs.size()) + " coefficients for " +
                          std::to_string(slices.size()) + " slices");
  if (slices.empty()) throw ValidationError("linear_combination: no slices");
  Matrix out = Matrix::Zero(slices.front().rows(), slices.front().cols());
  for (std::size_t l = 0; l < slices.size(); ++l) {
    if (slices[l].rows() != out.rows() || slices[l].cols() != out.cols())
      throw ValidationError("linear_combination: slice " + std::to_string(l + 1) + " shape mismatch");
    out += coeffs(static_cast<Eigen::Index>(l)) * slices[l];
  }
  return out;
}

Vector vec_lower_pairs(const Matrix& M) {
  const Eigen::Index n = M.rows();
  if (M.cols() != n) throw ValidationError("vec_lower_pairs: matrix is not square");
  Vector v(n * (n - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) v(k++) = M(i, j);
  return v;
}

Matrix unvec_lower_pairs(const Vector& v, int n) {
  if (v.size() != static_cast<Eigen::Index>(n) * (n - 1) / 2)
    throw ValidationError("unvec_lower_pairs: length mismatch");
  Matrix M = Matrix::Zero(n, n);
  Eigen::Index k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j + 1; i < n; ++i) {
      M(i, j) = v(k);
      M(j, i) = v(k);
      ++k;
    }
  return M;
}

}  // namespace star
