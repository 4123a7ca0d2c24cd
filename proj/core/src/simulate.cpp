#include "star/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "star/errors.hpp"
#include "star/rng.hpp"

namespace star {

namespace {

Matrix initial_snapshot(Rng& rng, int n, double density, bool directed) {
  Matrix A = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = directed ? 0 : j + 1; i < n; ++i) {
      if (i == j) continue;
      const double edge = rng.uniform() < density ? 1.0 : 0.0;
      A(i, j) = edge;
      if (!directed) A(j, i) = edge;
    }
  return A;
}

SimResult simulate_directed(const SimConfig& config, const CovariateTensor& covariates,
                            const ModelParams& params) {
  const int n = config.n;
  const int T = config.T;
  Rng rng(config.seed);
  const Vector ones = Vector::Ones(n);

  Eigen::LLT<Matrix> omega_llt(params.omega + config.jitter * Matrix::Identity(2, 2));
  if (omega_llt.info() != Eigen::Success)
    throw NumericalError("simulate_star: omega is not positive semi-definite");
  const Matrix omega_chol = omega_llt.matrixL();

  std::vector<Matrix> snapshots;
  snapshots.push_back(initial_snapshot(rng, n, config.initial_density, true));
  SimResult result;

  for (int t = 1; t <= T; ++t) {
    const Matrix& A_prev = snapshots.back();
    const LagStatTensor stats = build_lag_stats_directed(A_prev, config.spec.stats);
    Matrix mean = Matrix::Zero(n, n);
    for (int l = 0; l < covariates.covariate_count(); ++l)
      mean += params.beta(l) * covariates.slices[static_cast<std::size_t>(l)][static_cast<std::size_t>(t - 1)];
    for (std::size_t l = 0; l < stats.slices.size(); ++l)
      mean += params.theta(static_cast<Eigen::Index>(l)) * stats.slices[l];

    Vector s_total = Vector::Zero(n);
    Vector r_total = Vector::Zero(n);
    Matrix R = Matrix::Zero(n, n);
    if (config.spec.covariance_design != CovarianceDesign::kNone) {
      // Identity-basis sender/receiver pairs share the 2x2 covariance.
      for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d z(rng.normal(), rng.normal());
        const Eigen::Vector2d sr = omega_chol * z;
        s_total(i) += sr(0);
        r_total(i) += sr(1);
      }
      if (config.spec.covariance_design == CovarianceDesign::kFull) {
        const CovarianceBases bases = build_H_directed(A_prev);
        s_total += std::sqrt(params.tau_s2) * psd_normal(rng, bases.sender[1]);
        r_total += std::sqrt(params.tau_r2) * psd_normal(rng, bases.receiver[1]);
      }
      const double sR = std::sqrt(params.sigma2_R);
      for (int j = 0; j < n; ++j)
        for (int i = j + 1; i < n; ++i) {
          const double draw = sR * rng.normal();
          R(i, j) = draw;
          R(j, i) = draw;
        }
    }

    Matrix latent = mean + s_total * ones.transpose() + ones * r_total.transpose() + R;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (i != j) latent(i, j) += rng.normal();
    latent.diagonal().setZero();

    Matrix A = (latent.array() > 0.0).cast<double>().matrix();
    A.diagonal().setZero();
    snapshots.push_back(std::move(A));
    result.sender_effects.push_back(std::move(s_total));
    result.receiver_effects.push_back(std::move(r_total));
    result.pair_effects.push_back(std::move(R));
    result.latent.push_back(std::move(latent));
  }

  result.network = DynamicNetwork::from_snapshots(std::move(snapshots), true);
  result.covariates = covariates;
  return result;
}

SimResult simulate_undirected(const SimConfig& config, const CovariateTensor& covariates,
                              const UndirectedModelParams& params) {
  const int n = config.n;
  const int T = config.T;
  Rng rng(config.seed);
  const Vector ones = Vector::Ones(n);

  std::vector<Matrix> snapshots;
  snapshots.push_back(initial_snapshot(rng, n, config.initial_density, false));
  SimResult result;

  for (int t = 1; t <= T; ++t) {
    const Matrix& A_prev = snapshots.back();
    const LagStatTensor stats = build_lag_stats_undirected(A_prev);
    Matrix mean = Matrix::Zero(n, n);
    for (int l = 0; l < covariates.covariate_count(); ++l)
      mean += params.beta(l) * covariates.slices[static_cast<std::size_t>(l)][static_cast<std::size_t>(t - 1)];
    for (std::size_t l = 0; l < stats.slices.size(); ++l)
      mean += params.theta(static_cast<Eigen::Index>(l)) * stats.slices[l];

    Vector s = Vector::Zero(n);
    if (config.spec.covariance_design != CovarianceDesign::kNone) {
      const CovarianceBases bases = build_H_undirected(A_prev);
      s = std::sqrt(params.tau_s) * psd_normal(rng, bases.sender[0]);
    }

    Matrix latent = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = j + 1; i < n; ++i) {
        const double v = mean(i, j) + s(i) + s(j) + rng.normal();
        latent(i, j) = v;
        latent(j, i) = v;
      }

    Matrix A = (latent.array() > 0.0).cast<double>().matrix();
    A.diagonal().setZero();
    snapshots.push_back(std::move(A));
    result.sender_effects.push_back(s);
    result.receiver_effects.push_back(std::move(s));
    result.latent.push_back(std::move(latent));
  }

  result.network = DynamicNetwork::from_snapshots(std::move(snapshots), false);
  result.covariates = covariates;
  return result;
}

}  // namespace

SimResult simulate_star(const SimConfig& config, const CovariateTensor& covariates) {
  if (config.n < 2 || config.T < 1) throw ValidationError("simulate_star: need n >= 2 and T >= 1");
  if (config.initial_density < 0 || config.initial_density > 1)
    throw ValidationError("simulate_star: initial_density must be in [0,1]");
  covariates.validate(config.n, config.T);
  if (config.spec.directed) {
    const auto* params = std::get_if<ModelParams>(&config.params);
    if (!params) throw ValidationError("simulate_star: directed spec needs directed parameters");
    if (params->tau_s2 < 0 || params->tau_r2 < 0 || params->sigma2_R < 0)
      throw ValidationError("simulate_star: variance components must be nonnegative");
    if (params->beta.size() != covariates.covariate_count())
      throw ValidationError("simulate_star: beta length does not match covariate count");
    if (params->theta.size() != static_cast<Eigen::Index>(config.spec.stats.size()))
      throw ValidationError("simulate_star: theta length does not match stat count");
    return simulate_directed(config, covariates, *params);
  }
  const auto* params = std::get_if<UndirectedModelParams>(&config.params);
  if (!params) throw ValidationError("simulate_star: undirected spec needs undirected parameters");
  if (params->tau_s < 0) throw ValidationError("simulate_star: tau_s must be nonnegative");
  if (params->beta.size() != covariates.covariate_count())
    throw ValidationError("simulate_star: beta length does not match covariate count");
  if (params->theta.size() != 3) throw ValidationError("simulate_star: undirected theta must have 3 entries");
  return simulate_undirected(config, covariates, *params);
}

CovariateTensor generate_sim_study_covariates(int n, int T, std::uint64_t seed) {
  if (n < 2 || T < 1) throw ValidationError("generate_sim_study_covariates: need n >= 2 and T >= 1");
  Rng rng(seed);
  CovariateTensor cov;
  cov.labels = {"intercept", "group_match", "trait_distance"};

  cov.slices.emplace_back(static_cast<std::size_t>(T), Matrix::Ones(n, n));

  Matrix binary = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = j + 1; i < n; ++i) {
      const double v = rng.uniform() < 0.5 ? 1.0 : 0.0;
      binary(i, j) = v;
      binary(j, i) = v;
    }
  cov.slices.emplace_back(static_cast<std::size_t>(T), binary);

  // AR(1) trait paths started at the stationary distribution.
  const double rho = 0.9;
  const double innovation_sd = std::sqrt(0.05);
  const double stationary_sd = innovation_sd / std::sqrt(1.0 - rho * rho);
  Vector z(n);
  for (int i = 0; i < n; ++i) z(i) = stationary_sd * rng.normal();
  std::vector<Matrix> distances;
  for (int t = 1; t <= T; ++t) {
    for (int i = 0; i < n; ++i) z(i) = rho * z(i) + innovation_sd * rng.normal();
    Matrix D(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) D(i, j) = std::abs(z(i) - z(j));
    distances.push_back(std::move(D));
  }
  cov.slices.push_back(std::move(distances));
  return cov;
}

ModelParams sim_study_truth(bool with_dependence) {
  ModelParams params;
  params.beta = Vector(3);
  params.beta << -2.5, 0.5, -2.0;
  params.theta = Vector(8);
  params.theta << 0.0075, 0.0075, 0.75, 0.75, 0.025, 0.025, 0.025, -0.05;
  if (with_dependence) {
    params.tau_s2 = 0.2;
    params.tau_r2 = 0.1;
    params.omega = Matrix(2, 2);
    params.omega << 0.25, 0.1, 0.1, 0.5;
    params.sigma2_R = 0.5;
  }
  return params;
}

namespace {

void append_rows(std::vector<SimStudyRow>& rows, int replicate, const std::string& truth_model,
                 const std::string& fit_model, const ModelParams& truth, const FitReport* report,
                 bool failed) {
  auto add = [&](const std::string& name, double true_value, double posterior_mean) {
    rows.push_back({replicate, truth_model, fit_model, name, true_value, posterior_mean, failed});
  };
  const Vector beta_mean = report ? report->beta.mean : Vector::Zero(truth.beta.size());
  const Vector theta_mean = report ? report->theta.mean : Vector::Zero(truth.theta.size());
  for (Eigen::Index i = 0; i < truth.beta.size(); ++i)
    add("beta" + std::to_string(i + 1), truth.beta(i), beta_mean(i));
  for (Eigen::Index i = 0; i < truth.theta.size(); ++i)
    add("theta" + std::to_string(i + 1), truth.theta(i), theta_mean(i));
}

}  // namespace

std::vector<SimStudyRow> run_sim_study(const SimStudyConfig& config, const FitOptions& fit_options) {
  if (config.replicate_count < 1) throw ValidationError("run_sim_study: need replicate_count >= 1");
  const ModelParams truth = sim_study_truth(config.with_dependence);
  const std::string truth_model = config.with_dependence ? "dependence" : "independence";

  struct ReplicateOut {
    std::vector<SimStudyRow> rows;
  };
  std::vector<ReplicateOut> outputs(static_cast<std::size_t>(config.replicate_count));

  auto run_one = [&](int rep) {
    const std::uint64_t seed = derive_stream_seed(config.seed, static_cast<std::uint64_t>(rep));
    std::vector<SimStudyRow>& rows = outputs[static_cast<std::size_t>(rep)].rows;
    try {
      const CovariateTensor covariates =
          generate_sim_study_covariates(config.n, config.T, derive_stream_seed(seed, 1));
      SimConfig sim;
      sim.n = config.n;
      sim.T = config.T;
      sim.seed = derive_stream_seed(seed, 2);
      sim.params = truth;
      sim.spec = StarModelSpec::defaults(true);
      sim.spec.covariance_design =
          config.with_dependence ? CovarianceDesign::kFull : CovarianceDesign::kNone;
      sim.initial_density = config.initial_density;
      const SimResult data = simulate_star(sim, covariates);

      for (const auto design : {CovarianceDesign::kFull, CovarianceDesign::kNone}) {
        StarModelSpec fit_spec = StarModelSpec::defaults(true);
        fit_spec.covariance_design = design;
        try {
          const FitReport report = fit(data.network, covariates, fit_spec, fit_options);
          append_rows(rows, rep, truth_model, to_string(design), truth, &report, false);
        } catch (const std::exception&) {
          append_rows(rows, rep, truth_model, to_string(design), truth, nullptr, true);
        }
      }
    } catch (const std::exception&) {
      append_rows(rows, rep, truth_model, "full", truth, nullptr, true);
      append_rows(rows, rep, truth_model, "none", truth, nullptr, true);
    }
  };

  int workers = config.workers > 0 ? config.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, config.replicate_count));
  if (workers == 1) {
    for (int rep = 0; rep < config.replicate_count; ++rep) run_one(rep);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const int rep = next.fetch_add(1);
          if (rep >= config.replicate_count) return;
          run_one(rep);
        }
      });
    for (auto& th : pool) th.join();
  }

  std::vector<SimStudyRow> rows;
  for (auto& out : outputs)
    for (auto& row : out.rows) rows.push_back(std::move(row));
  return rows;
}

}  // namespace star
