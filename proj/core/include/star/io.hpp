#pragma once

#include <optional>
#include <string>
#include <vector>

#include "star/diagnostics.hpp"
#include "star/gibbs.hpp"
#include "star/model.hpp"
#include "star/network.hpp"
#include "star/simulate.hpp"
#include "star/vb.hpp"

// File formats and the run configuration.
//
// Panel format (edge list, CSV body):
//   # star-panel v1 directed=<true|false> n=<n> T=<T>
//   t,i,j
//   0,1,2
//   ...
// Absent (t,i,j) rows mean no edge; self loops are rejected; duplicate rows
// are idempotent. Actor ids outside 1..n are re-indexed by sorted order,
// with the original labels kept on the network object.

namespace star {

DynamicNetwork read_panel(const std::string& path);
void write_panel(const std::string& path, const DynamicNetwork& network);

/// Dense numeric CSV without header.
Matrix read_dense_csv(const std::string& path);
void write_dense_csv(const std::string& path, const Matrix& M);

/// Shortest decimal form that round-trips a double.
std::string format_double(double x);

/// One covariate source in the run configuration.
struct CovariateSource {
  std::string label;
  bool intercept = false;
  std::string static_csv;                  // one matrix reused at every step
  std::vector<std::string> csv_per_step;   // one matrix per step t = 1..T
};

struct SimulateSettings {
  int n = 2;
  int T = 1;
  double initial_density = 0.05;
  int replicates = 1;
  bool study = false;        // also run the fit-both-designs recovery study
  bool with_dependence = true;
  std::variant<ModelParams, UndirectedModelParams> params;
};

struct DiagnosticsSettings {
  int draws = 10000;
  int grid_points = 200;
  std::vector<double> p_values = default_variance_shares();
};

/// Parsed and validated run configuration (unknown keys are rejected with a
/// path to the offending key).
struct RunConfig {
  std::uint64_t seed = 0;
  int workers = 0;
  std::string output_dir = ".";
  StarModelSpec model;
  FitOptions fit_options;
  std::string panel_path;
  std::vector<CovariateSource> covariates;
  std::string truth_path;
  std::optional<SimulateSettings> simulate;
  DiagnosticsSettings diagnostics;
};

RunConfig load_run_config(const std::string& path);

/// Materializes the covariate tensor described by the config sources.
CovariateTensor load_covariates(const RunConfig& config, int n, int T);

// Artifact writers.
void write_fit_report_json(const std::string& path, const FitReport& report,
                           const std::string& truth_path);
void write_posterior_csv(const std::string& path, const FitReport& report);
void write_ball_curves_csv(const std::string& path, const std::vector<BallCurve>& curves);
void write_sim_study_csv(const std::string& path, const std::vector<SimStudyRow>& rows);
void write_truth_json(const std::string& path, const SimulateSettings& sim, std::uint64_t seed);
void write_stats_csv(const std::string& path, const std::vector<std::pair<int, LagStatTensor>>& stats);
void write_bases_csv(const std::string& path, const std::vector<std::pair<int, CovarianceBases>>& bases);

}  // namespace star
