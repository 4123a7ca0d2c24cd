#pragma once

#include <cstdint>

#include "star/model.hpp"
#include "star/network.hpp"

namespace star {

/// Posterior sample summaries from the reference Gibbs sampler. Intervals
/// are central 95% sample quantiles.
struct GibbsSummary {
  std::vector<std::string> beta_labels, theta_labels;
  Vector beta_mean, beta_sd, beta_lo, beta_hi;
  Vector theta_mean, theta_sd, theta_lo, theta_hi;
  double tau_s2_mean = 0, tau_r2_mean = 0, sigma2_R_mean = 0;
  Matrix omega_mean;
  int iterations = 0, burn_in = 0;
};

/// Full-conditional Gibbs sampler for the directed model with pair-effect
/// augmentation: truncated-normal latent draws, multivariate-normal
/// coefficient and effect draws, inverse-gamma / inverse-Wishart variance
/// draws. Desk-scale correctness oracle, guarded to n <= 30, T <= 10.
GibbsSummary gibbs_reference_fit(const DynamicNetwork& data, const CovariateTensor& covariates,
                                 const StarModelSpec& spec, int iterations, int burn_in,
                                 std::uint64_t seed);

}  // namespace star
