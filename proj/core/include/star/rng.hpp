#pragma once

#include <cstdint>
#include <random>

#include "star/network.hpp"

namespace star {

/// Derives an independent stream seed from a master seed and a counter.
/// Fixed scheme (splitmix64) so parallel batches reproduce byte-identically.
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t counter);

/// Thin deterministic RNG wrapper used by the simulator, the Gibbs sampler,
/// and the Monte Carlo diagnostics.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }
  /// Gamma with the given shape and scale (mean = shape * scale).
  double gamma(double shape, double scale) {
    std::gamma_distribution<double> g(shape, scale);
    return g(engine_);
  }
  /// Inverse gamma with shape a and scale b (mean b/(a-1) for a > 1).
  double inverse_gamma(double a, double b) { return 1.0 / gamma(a, 1.0 / b); }

  Vector normal_vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  /// Unit-variance normal with mean loc truncated to (0, inf) when
  /// positive_side, else to (-inf, 0). Rejection sampling with an
  /// exponential proposal in the far tail.
  double truncated_normal(double loc, bool positive_side);

  /// 2x2 inverse Wishart with df degrees of freedom and scale matrix S.
  Matrix inverse_wishart_2x2(double df, const Matrix& S);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Draw from N(mean, cov) for symmetric positive definite cov.
Vector multivariate_normal(Rng& rng, const Vector& mean, const Matrix& cov);

/// Draw from N(0, Sigma) for symmetric PSD Sigma (eigenvalue clamping, so
/// rank-deficient covariances are handled exactly).
Vector psd_normal(Rng& rng, const Matrix& sigma);

}  // namespace star
