#include "star/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "star/errors.hpp"

namespace star {

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t counter) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::truncated_normal(double loc, bool positive_side) {
  // Sample Z ~ N(0,1) truncated to Z > a, then shift; a = -loc for the
  // positive side. Negative side by symmetry.
  const double a = positive_side ? -loc : loc;
  double z;
  if (a < 0.45) {
    do {
      z = normal();
    } while (z <= a);
  } else {
    // Robert (1995) translated-exponential rejection for the upper tail.
    const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
      const double e = -std::log(uniform()) / lambda;
      z = a + e;
      const double d = z - lambda;
      if (std::log(uniform()) <= -0.5 * d * d) break;
    }
  }
  return positive_side ? loc + z : loc - z;
}

Matrix Rng::inverse_wishart_2x2(double df, const Matrix& S) {
  if (S.rows() != 2 || S.cols() != 2) throw ValidationError("inverse_wishart_2x2: scale must be 2x2");
  // W ~ Wishart(df, S^{-1}) via Bartlett; return W^{-1}.
  const Matrix Sinv = S.inverse();
  Eigen::LLT<Matrix> llt(Sinv);
  if (llt.info() != Eigen::Success) throw NumericalError("inverse_wishart_2x2: scale not positive definite");
  const Matrix L = llt.matrixL();
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = std::sqrt(gamma(0.5 * df, 2.0));
  A(1, 1) = std::sqrt(gamma(0.5 * (df - 1.0), 2.0));
  A(1, 0) = normal();
  const Matrix LA = L * A;
  const Matrix W = LA * LA.transpose();
  return W.inverse();
}

Vector multivariate_normal(Rng& rng, const Vector& mean, const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("multivariate_normal: covariance not positive definite");
  return mean + Matrix(llt.matrixL()) * rng.normal_vector(static_cast<int>(mean.size()));
}

Vector psd_normal(Rng& rng, const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  if (eig.info() != Eigen::Success) throw NumericalError("psd_normal: eigendecomposition failed");
  Vector scale = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * scale.asDiagonal() * rng.normal_vector(static_cast<int>(sigma.rows()));
}

}  // namespace star
