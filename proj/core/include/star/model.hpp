#pragma once

#include <string>
#include <vector>

#include "star/netstats.hpp"
#include "star/network.hpp"

namespace star {

/// Covariance layout for the simultaneous-dependence part of the model.
///   kFull         two sender / two receiver bases plus one cross basis
///                 (identity + degree-normalized similarity)
///   kIdentityOnly single identity basis per role with correlated
///                 sender/receiver pairs
///   kNone         independent dyads (no actor effects, no pair effects)
enum class CovarianceDesign { kFull, kIdentityOnly, kNone };

std::string to_string(CovarianceDesign design);
CovarianceDesign covariance_design_from_string(const std::string& s);

/// Prior hyperparameters. Defaults are weakly informative with finite means.
struct PriorSet {
  double sigma2_beta = 100.0;
  double sigma2_theta = 100.0;
  double a_s0 = 2.0, b_s0 = 1.0;
  double a_r0 = 2.0, b_r0 = 1.0;
  double a_R0 = 2.0, b_R0 = 1.0;
  double a_omega0 = 4.0;
  Matrix B_omega0 = Matrix::Identity(2, 2);

  void validate() const;
};

/// Model specification: directedness, mean stats, covariance design, priors.
struct StarModelSpec {
  bool directed = true;
  std::vector<std::string> stats;
  CovarianceDesign covariance_design = CovarianceDesign::kFull;
  PriorSet priors;
  int lag_depth = 1;

  int sender_basis_count() const;
  int receiver_basis_count() const;
  int cross_basis_count() const;

  void validate() const;
  static StarModelSpec defaults(bool directed);
};

/// Directed model parameters. sigma2_eps is fixed at 1 for identifiability.
struct ModelParams {
  Vector beta;
  Vector theta;
  double tau_s2 = 0.0;
  double tau_r2 = 0.0;
  /// 2x2 covariance of the identity-basis sender/receiver pair:
  /// [[tau_s1, tau_sr1], [tau_sr1, tau_r1]].
  Matrix omega = Matrix::Zero(2, 2);
  double sigma2_R = 0.0;
  static constexpr double sigma2_eps = 1.0;

  double tau_s1() const { return omega(0, 0); }
  double tau_r1() const { return omega(1, 1); }
  double tau_sr1() const { return omega(0, 1); }
};

/// Undirected model parameters (single actor-effect variance).
struct UndirectedModelParams {
  Vector beta;
  Vector theta;
  double tau_s = 0.0;
  static constexpr double sigma2 = 1.0;
};

/// Result of the covariance-validity check.
struct PsdReport {
  bool valid = true;
  double min_eigenvalue = 0.0;
  std::string detail;
};

/// Checks omega and every paired sender/receiver block
/// [[tau_sk H_sk, tau_srk H_srk], [tau_srk H_srk', tau_rk H_rk]] for positive
/// semi-definiteness (minimum eigenvalue >= -1e-8). Never throws.
PsdReport validate_psd(const ModelParams& params, const CovarianceBases& bases);

/// Effective sender/receiver/cross weights implied by the parameters for the
/// given number of bases (identity-basis weights come from omega).
Vector sender_weights(const ModelParams& params, int K_s);
Vector receiver_weights(const ModelParams& params, int K_r);
Vector cross_weights(const ModelParams& params, int K_sr);

/// Full n^2 x n^2 covariance of the vectorized latent snapshot:
/// row/column similarity blocks, cross terms, the reciprocal-pair swap, and
/// dyad noise. Test-scale only (n <= 64).
Matrix assemble_dyad_covariance(const ModelParams& params, const CovarianceBases& bases, int n);

/// Marginal edge probability Phi(m / sqrt(var_E + var_sr)) after integrating
/// out additive effects with total variance var_sr.
double marginal_edge_probability(double m, double var_sr, double var_E);

/// Intraclass correlation of reciprocal residual pairs.
double icc_reciprocity(double sigma2_R);

/// Normalized variance-component vector
/// (tau_s1, tau_s2, ..., tau_r1, ..., sigma2_R, sigma2_eps) / total.
Vector variance_ratio_vector(const ModelParams& params);

}  // namespace star
