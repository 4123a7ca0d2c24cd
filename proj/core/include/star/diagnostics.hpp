#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "star/model.hpp"
#include "star/vb.hpp"

// Evidence diagnostics for simultaneous dependence: the posterior mass of
// the stacked actor-effect vector inside a ball of radius epsilon, per time
// step, compared against analytic curves for an isotropic reference effect
// whose variance share is a chosen proportion p.

namespace star {

/// Empirical or analytic CDF of the effect-vector norm on an epsilon grid.
struct BallCurve {
  std::string label;
  Vector epsilons;
  Vector probabilities;
};

/// Epsilon grid from 0 to max_value, inclusive.
Vector epsilon_grid(double max_value, int points = 200);

/// Monte Carlo norm CDF of the fitted actor-effect posterior, one curve per
/// fitted transition. Requires a fit with actor effects.
std::vector<BallCurve> posterior_ball_curves(const FitReport& report, const Vector& grid, int draws,
                                             std::uint64_t seed);

/// Same, on the default grid: grid_points values from 0 to 1.2x the maximum
/// sampled norm across all transitions.
std::vector<BallCurve> posterior_ball_curves(const FitReport& report, int draws, int grid_points,
                                             std::uint64_t seed);

/// Norm CDF of an isotropic dim-dimensional normal with scale sigma:
/// regularized lower incomplete gamma of (dim/2, (eps/sigma)^2/2).
double chi_cdf(int dim, double sigma, double epsilon);

/// Analytic comparison curves for variance shares p: each uses scale
/// sigma^2 = p (sigma2_R + 1) / ((1-p)(K_s + K_r)) in dimension n(K_s+K_r).
std::vector<BallCurve> comparator_curves(int n, int K_s, int K_r, double sigma2_R,
                                         const std::vector<double>& p_values, const Vector& grid);

/// Default variance shares {0.05, 0.1, 0.15, 0.2, 0.25, 0.3}.
const std::vector<double>& default_variance_shares();

/// Pooled variance of the fitted pair-effect entries, used as the sigma2_R
/// plug-in for the comparator curves.
double fitted_pair_variance(const FitReport& report);

/// Shrinkage factor sqrt(sigma2_eps + tau_s + tau_r + sigma2_R) applied to
/// naive coefficient estimates when simultaneous dependence is ignored,
/// reading tau_s / tau_r as diagonal averages of the effect covariances
/// (a heuristic when those are non-scalar).
double attenuation_factor(const ModelParams& params);

/// Largest epsilon-grid point where the curve is still below 0.5 -- the
/// curve's median norm, used to place curves against a comparator.
double curve_median(const BallCurve& curve);

}  // namespace star
