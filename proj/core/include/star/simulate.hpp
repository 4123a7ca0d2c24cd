#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "star/model.hpp"
#include "star/network.hpp"
#include "star/vb.hpp"

namespace star {

/// One synthetic-data configuration. The initial snapshot is drawn with
/// independent edges at initial_density; every later snapshot follows the
/// generative model driven by its predecessor.
struct SimConfig {
  int n = 2;
  int T = 1;
  std::uint64_t seed = 0;
  std::variant<ModelParams, UndirectedModelParams> params;
  StarModelSpec spec;
  double initial_density = 0.05;
  int replicate_count = 1;
  /// Ridge used when checking/factorizing effect covariances.
  double jitter = 1e-6;
  /// Fixed initial snapshot; drawn at initial_density when absent.
  std::optional<Matrix> A0;
};

/// Simulated data plus the latent draws behind it (one entry per transition).
struct SimResult {
  DynamicNetwork network;
  CovariateTensor covariates;
  std::vector<Vector> sender_effects;    // combined sender effect per t
  std::vector<Vector> receiver_effects;  // combined receiver effect per t
  std::vector<Matrix> pair_effects;      // symmetric pair effects per t
  std::vector<Matrix> latent;            // latent score matrices per t
};

/// Simulates one dynamic network, reusing the provided covariates if given
/// (otherwise covariates must be supplied through the config-independent
/// overload below).
SimResult simulate_star(const SimConfig& config, const CovariateTensor& covariates);

/// Covariates of the synthetic study: an intercept, a static symmetric
/// binary slice, and per-step absolute distances between AR(1) paths
/// (coefficient 0.9, innovation variance 0.05, stationary start).
CovariateTensor generate_sim_study_covariates(int n, int T, std::uint64_t seed);

/// The synthetic-study truth for directed networks (with or without the
/// simultaneous-dependence components).
ModelParams sim_study_truth(bool with_dependence);

/// Long-format recovery table: one row per replicate x fit x parameter.
struct SimStudyRow {
  int replicate = 0;
  std::string truth_model;  // "dependence" or "independence"
  std::string fit_model;    // covariance design used in the fit
  std::string parameter;
  double true_value = 0;
  double posterior_mean = 0;
  bool failed = false;
};

struct SimStudyConfig {
  int n = 50;
  int T = 10;
  std::uint64_t seed = 0;
  int replicate_count = 1;
  bool with_dependence = true;
  double initial_density = 0.05;
  int workers = 0;  // 0 = hardware concurrency
};

/// Simulates replicate_count data sets and fits both the full covariance
/// design and the independent-dyad baseline to each; failed replicates are
/// flagged instead of aborting the batch.
std::vector<SimStudyRow> run_sim_study(const SimStudyConfig& config, const FitOptions& fit_options);

}  // namespace star
