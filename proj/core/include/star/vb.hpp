#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "star/model.hpp"
#include "star/network.hpp"

// Mean-field variational fitter. The approximate posterior factorizes over
// (coefficients) x (variance components) x (latent edge scores) x
// (actor effects) x (pair effects) x (pair variance), and each factor has a
// closed-form coordinate update. One call to fit() cycles
//   latents -> coefficients -> actor effects -> pair effects ->
//   variance components -> pair variance
// until the maximum absolute change of the coefficient and effect means
// drops below tolerance.
//
// The effect vector at each time step is stacked in the block order
// (s1, r1, s2, r2): identity-basis sender, identity-basis receiver,
// similarity-basis sender, similarity-basis receiver.

namespace star {

struct FitOptions {
  int max_iterations = 500;
  double tolerance = 1e-6;
  /// Ridge added to the similarity bases before inversion, and to effect
  /// precisions on factorization failure.
  double jitter = 1e-6;
  std::uint64_t seed = 0;
  bool trace = false;
  /// Debug reading: feed raw truncation locations instead of expected
  /// latents into the coefficient and effect updates.
  bool use_raw_locations = false;
};

/// All parameters of the factorized posterior. Per-time vectors are indexed
/// by fitted transition (0-based; transition k is time first_t + k).
struct VariationalState {
  // Coefficients.
  Vector mu_m;
  Matrix sigma_m;

  // Variance components (inverse-gamma shapes/scales, inverse-Wishart df/scale).
  double a_s = 0, b_s = 0, a_r = 0, b_r = 0;
  double a_omega = 0;
  Matrix B_omega;

  // Pair-effect variance.
  double a_R = 0, b_R = 0;
  double sigma2_R_tilde = 0;

  // Latent edge scores.
  std::vector<Matrix> M_A;       // truncation locations
  std::vector<Matrix> E_latent;  // truncated-normal means

  // Directed actor effects (s1, r1, s2, r2 blocks; s2/r2 empty under the
  // identity-only design) and their joint covariance.
  std::vector<Vector> mu_s1, mu_r1, mu_s2, mu_r2;
  std::vector<Matrix> sigma_sr;

  // Undirected actor effects.
  std::vector<Vector> mu_s;
  std::vector<Matrix> sigma_s;

  // Pair effects.
  std::vector<Matrix> M_R;
};

/// Immutable prepared inputs for one fit: observed snapshots at the fitted
/// transitions, stacked dyad design matrices, and similarity-basis inverses.
struct VbProblem {
  StarModelSpec spec;
  FitOptions options;
  int n = 0;
  int T = 0;        // fitted transitions
  int first_t = 1;  // == spec.lag_depth
  int p1 = 0, p2 = 0;
  std::vector<std::string> covariate_labels;
  std::vector<std::string> stat_labels;
  std::vector<Matrix> A;     // observed snapshots at fitted transitions
  std::vector<Matrix> Xvec;  // per transition: [vec(X_1)..vec(X_p1) vec(G_1)..vec(G_p2)]
  std::vector<Matrix> Hs_inv, Hr_inv;  // jittered similarity-basis inverses
  Matrix sigma_m;                      // coefficient covariance (data-independent)
  Matrix prior_precision;

  int dyads() const { return spec.directed ? n * (n - 1) : n * (n - 1) / 2; }
  int effect_dim() const;
};

VbProblem prepare_problem(const DynamicNetwork& data, const CovariateTensor& covariates,
                          const StarModelSpec& spec, const FitOptions& options);

VariationalState initial_state(const VbProblem& problem);

// Coordinate updates. Each reads the current state and overwrites its block.
void update_latents(const VbProblem& problem, VariationalState& state);
void update_coefficients(const VbProblem& problem, VariationalState& state);
void update_actor_effects(const VbProblem& problem, VariationalState& state);
void update_pair_effects(const VbProblem& problem, VariationalState& state);
void update_variance_components(const VbProblem& problem, VariationalState& state);
void update_pair_variance(const VbProblem& problem, VariationalState& state);

struct ParamSummary {
  Vector mean;
  Vector sd;
};

struct FitReport {
  StarModelSpec spec;
  int iterations = 0;
  bool converged = false;
  std::string convergence_metric = "max_abs_param_change";
  std::vector<double> trace;

  std::vector<std::string> beta_labels, theta_labels;
  ParamSummary beta, theta;
  double tau_s2_mean = 0, tau_s2_sd = 0;
  double tau_r2_mean = 0, tau_r2_sd = 0;
  Matrix omega_mean, omega_sd;
  double sigma2_R_mean = 0, sigma2_R_sd = 0;
  double tau_s_mean = 0, tau_s_sd = 0;  // undirected

  /// Factorized-posterior marginals understate uncertainty; interval
  /// consumers should treat the SDs as optimistic.
  bool concentrated_interval_warning = true;

  VariationalState state;
  VbProblem problem;
};

/// Runs the full cycle to convergence. Deterministic given inputs.
FitReport fit(const DynamicNetwork& data, const CovariateTensor& covariates, const StarModelSpec& spec,
              const FitOptions& options);

}  // namespace star
