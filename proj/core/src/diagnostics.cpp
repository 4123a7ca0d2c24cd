#include "star/diagnostics.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "star/errors.hpp"
#include "star/rng.hpp"
#include "star/special.hpp"

namespace star {

Vector epsilon_grid(double max_value, int points) {
  if (points < 2 || max_value <= 0) throw ValidationError("epsilon_grid: need points >= 2 and max > 0");
  return Vector::LinSpaced(points, 0.0, max_value);
}

namespace {

// Sorted posterior norm samples per fitted transition.
std::vector<std::vector<double>> sample_effect_norms(const FitReport& report, int draws,
                                                     std::uint64_t seed) {
  if (report.spec.covariance_design == CovarianceDesign::kNone)
    throw ValidationError("posterior_ball_curves: no random effects in spec");
  if (draws < 1000) throw ValidationError("posterior_ball_curves: need at least 1000 draws");
  const VariationalState& state = report.state;
  const bool directed = report.spec.directed;
  const std::size_t T = directed ? state.sigma_sr.size() : state.sigma_s.size();

  std::vector<std::vector<double>> norms(T);
  for (std::size_t k = 0; k < T; ++k) {
    const Matrix& cov = directed ? state.sigma_sr[k] : state.sigma_s[k];
    const int dim = static_cast<int>(cov.rows());
    Vector mean(dim);
    if (directed) {
      const int n = static_cast<int>(state.mu_s1[k].size());
      mean.segment(0, n) = state.mu_s1[k];
      mean.segment(n, n) = state.mu_r1[k];
      if (dim == 4 * n) {
        mean.segment(2 * n, n) = state.mu_s2[k];
        mean.segment(3 * n, n) = state.mu_r2[k];
      }
    } else {
      mean = state.mu_s[k];
    }

    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success)
      throw NumericalError("posterior_ball_curves: effect covariance not positive definite");
    const Matrix L = llt.matrixL();

    Rng rng(derive_stream_seed(seed, k));
    norms[k].resize(static_cast<std::size_t>(draws));
    for (int d = 0; d < draws; ++d) norms[k][static_cast<std::size_t>(d)] = (mean + L * rng.normal_vector(dim)).norm();
    std::sort(norms[k].begin(), norms[k].end());
  }
  return norms;
}

std::vector<BallCurve> curves_from_norms(const FitReport& report,
                                         const std::vector<std::vector<double>>& norms,
                                         const Vector& grid) {
  std::vector<BallCurve> curves;
  for (std::size_t k = 0; k < norms.size(); ++k) {
    BallCurve curve;
    curve.label = "t=" + std::to_string(report.problem.first_t + static_cast<int>(k));
    curve.epsilons = grid;
    curve.probabilities.resize(grid.size());
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
      const auto it = std::upper_bound(norms[k].begin(), norms[k].end(), grid(g));
      curve.probabilities(g) =
          static_cast<double>(it - norms[k].begin()) / static_cast<double>(norms[k].size());
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace

std::vector<BallCurve> posterior_ball_curves(const FitReport& report, const Vector& grid, int draws,
                                             std::uint64_t seed) {
  return curves_from_norms(report, sample_effect_norms(report, draws, seed), grid);
}

std::vector<BallCurve> posterior_ball_curves(const FitReport& report, int draws, int grid_points,
                                             std::uint64_t seed) {
  const auto norms = sample_effect_norms(report, draws, seed);
  double max_norm = 0.0;
  for (const auto& v : norms) max_norm = std::max(max_norm, v.back());
  return curves_from_norms(report, norms, epsilon_grid(1.2 * max_norm, grid_points));
}

double chi_cdf(int dim, double sigma, double epsilon) {
  if (dim < 1) throw ValidationError("chi_cdf: dim must be >= 1");
  if (sigma <= 0) throw ValidationError("chi_cdf: sigma must be positive");
  if (epsilon < 0) throw ValidationError("chi_cdf: epsilon must be nonnegative");
  if (epsilon == 0) return 0.0;
  const double z = epsilon / sigma;
  return regularized_gamma_p(0.5 * dim, 0.5 * z * z);
}

std::vector<BallCurve> comparator_curves(int n, int K_s, int K_r, double sigma2_R,
                                         const std::vector<double>& p_values, const Vector& grid) {
  if (n < 2 || K_s < 1 || K_r < 1) throw ValidationError("comparator_curves: bad dimensions");
  if (sigma2_R < 0) throw ValidationError("comparator_curves: sigma2_R must be nonnegative");
  std::vector<BallCurve> curves;
  const int dim = n * (K_s + K_r);
  for (const double p : p_values) {
    if (p <= 0.0 || p >= 1.0) throw ValidationError("comparator_curves: p must lie in (0,1)");
    const double sigma2 = p * (sigma2_R + 1.0) / ((1.0 - p) * (K_s + K_r));
    BallCurve curve;
    curve.label = "p=" + std::to_string(p);
    curve.epsilons = grid;
    curve.probabilities.resize(grid.size());
    for (Eigen::Index g = 0; g < grid.size(); ++g)
      curve.probabilities(g) = chi_cdf(dim, std::sqrt(sigma2), grid(g));
    curves.push_back(std::move(curve));
  }
  return curves;
}

const std::vector<double>& default_variance_shares() {
  static const std::vector<double> shares = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  return shares;
}

double fitted_pair_variance(const FitReport& report) {
  const auto& M_R = report.state.M_R;
  if (M_R.empty()) return 0.0;
  double sum = 0.0, sum_sq = 0.0;
  long count = 0;
  for (const Matrix& M : M_R) {
    const int n = static_cast<int>(M.rows());
    for (int j = 0; j < n; ++j)
      for (int i = j + 1; i < n; ++i) {
        sum += M(i, j);
        sum_sq += M(i, j) * M(i, j);
        ++count;
      }
  }
  if (count < 2) return 0.0;
  const double mean = sum / static_cast<double>(count);
  return sum_sq / static_cast<double>(count) - mean * mean;
}

double attenuation_factor(const ModelParams& params) {
  const double tau_s = params.tau_s1() + params.tau_s2;
  const double tau_r = params.tau_r1() + params.tau_r2;
  if (tau_s < 0 || tau_r < 0 || params.sigma2_R < 0)
    throw ValidationError("attenuation_factor: variance components must be nonnegative");
  return std::sqrt(ModelParams::sigma2_eps + tau_s + tau_r + params.sigma2_R);
}

double curve_median(const BallCurve& curve) {
  for (Eigen::Index g = 0; g < curve.epsilons.size(); ++g)
    if (curve.probabilities(g) >= 0.5) return curve.epsilons(g);
  return curve.epsilons(curve.epsilons.size() - 1);
}

}  // namespace star
