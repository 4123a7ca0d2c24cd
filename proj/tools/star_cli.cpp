// Command-line driver: fit, simulate, diagnose, stats.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <string>

#include "star/diagnostics.hpp"
#include "star/errors.hpp"
#include "star/io.hpp"
#include "star/rng.hpp"
#include "star/simulate.hpp"
#include "star/vb.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool quiet = false;
};

star::RunConfig load_config(const CliArgs& args) {
  star::RunConfig config = star::load_run_config(args.config_path);
  if (args.seed) config.seed = *args.seed;
  if (args.workers) config.workers = *args.workers;
  fs::create_directories(config.output_dir);
  return config;
}

std::string out_path(const star::RunConfig& config, const std::string& name) {
  return (fs::path(config.output_dir) / name).string();
}

std::pair<star::DynamicNetwork, star::CovariateTensor> load_data(const star::RunConfig& config) {
  if (config.panel_path.empty()) throw star::ValidationError("config needs data.panel");
  star::DynamicNetwork net = star::read_panel(config.panel_path);
  if (net.directed != config.model.directed)
    throw star::ValidationError("panel directedness does not match model.directed");
  star::CovariateTensor cov = star::load_covariates(config, net.actor_count(), net.step_count());
  return {std::move(net), std::move(cov)};
}

int cmd_fit(const CliArgs& args) {
  const star::RunConfig config = load_config(args);
  auto [net, cov] = load_data(config);
  const star::FitReport report = star::fit(net, cov, config.model, config.fit_options);
  star::write_fit_report_json(out_path(config, "fit_report.json"), report, config.truth_path);
  star::write_posterior_csv(out_path(config, "posterior.csv"), report);
  if (!args.quiet)
    std::cout << "fit: " << report.iterations << " iterations, "
              << (report.converged ? "converged" : "max iterations reached") << "; report in "
              << config.output_dir << "\n";
  return 0;
}

void write_covariates(const star::RunConfig& config, const star::CovariateTensor& cov) {
  for (std::size_t l = 0; l < cov.slices.size(); ++l) {
    const auto& label = cov.labels[l];
    if (label == "intercept") continue;
    const auto& steps = cov.slices[l];
    bool is_static = true;
    for (std::size_t t = 1; t < steps.size(); ++t) is_static = is_static && steps[t] == steps[0];
    if (is_static) {
      star::write_dense_csv(out_path(config, "cov_" + label + ".csv"), steps[0]);
    } else {
      for (std::size_t t = 0; t < steps.size(); ++t)
        star::write_dense_csv(out_path(config, "cov_" + label + "_t" + std::to_string(t + 1) + ".csv"),
                              steps[t]);
    }
  }
}

int cmd_simulate(const CliArgs& args) {
  const star::RunConfig config = load_config(args);
  if (!config.simulate) throw star::ValidationError("config needs a simulate block");
  const star::SimulateSettings& sim = *config.simulate;
  if (sim.n < 2 || sim.T < 1) throw star::ValidationError("simulate needs n >= 2 and T >= 1");
  if (sim.replicates < 1) throw star::ValidationError("simulate.replicates must be >= 1");

  if (sim.study) {
    if (!config.model.directed) throw star::ValidationError("the recovery study is directed-only");
    star::SimStudyConfig study;
    study.n = sim.n;
    study.T = sim.T;
    study.seed = config.seed;
    study.replicate_count = sim.replicates;
    study.with_dependence = sim.with_dependence;
    study.initial_density = sim.initial_density;
    study.workers = config.workers;
    const auto rows = star::run_sim_study(study, config.fit_options);
    star::write_sim_study_csv(out_path(config, "sim_study.csv"), rows);
    if (!args.quiet) std::cout << "study: " << rows.size() << " rows in " << config.output_dir << "\n";
    return 0;
  }

  for (int rep = 0; rep < sim.replicates; ++rep) {
    const std::uint64_t rep_seed = star::derive_stream_seed(config.seed, static_cast<std::uint64_t>(rep));
    star::CovariateTensor cov;
    if (!config.covariates.empty())
      cov = star::load_covariates(config, sim.n, sim.T);
    else
      cov = star::generate_sim_study_covariates(sim.n, sim.T, star::derive_stream_seed(rep_seed, 1));

    star::SimConfig one;
    one.n = sim.n;
    one.T = sim.T;
    one.seed = star::derive_stream_seed(rep_seed, 2);
    one.params = sim.params;
    one.spec = config.model;
    one.initial_density = sim.initial_density;
    one.jitter = config.fit_options.jitter;
    const star::SimResult result = star::simulate_star(one, cov);

    const std::string suffix = sim.replicates == 1 ? "" : "_r" + std::to_string(rep + 1);
    star::write_panel(out_path(config, "network" + suffix + ".panel"), result.network);
    if (rep == 0 && config.covariates.empty()) write_covariates(config, cov);
  }
  star::write_truth_json(out_path(config, "truth.json"), sim, config.seed);
  if (!args.quiet)
    std::cout << "simulate: " << sim.replicates << " replicate(s) in " << config.output_dir << "\n";
  return 0;
}

int cmd_diagnose(const CliArgs& args) {
  const star::RunConfig config = load_config(args);
  if (config.model.covariance_design == star::CovarianceDesign::kNone)
    throw star::ValidationError("no random effects in spec");
  auto [net, cov] = load_data(config);
  const star::FitReport report = star::fit(net, cov, config.model, config.fit_options);

  const auto curves = star::posterior_ball_curves(report, config.diagnostics.draws,
                                                  config.diagnostics.grid_points, config.seed);
  star::write_ball_curves_csv(out_path(config, "ball_curves.csv"), curves);

  const double sigma2_R = star::fitted_pair_variance(report);
  const int K_s = config.model.sender_basis_count();
  const int K_r = config.model.receiver_basis_count();
  const auto comparators = star::comparator_curves(net.actor_count(), std::max(K_s, 1), std::max(K_r, 1),
                                                   sigma2_R, config.diagnostics.p_values,
                                                   curves.front().epsilons);
  star::write_ball_curves_csv(out_path(config, "comparator_curves.csv"), comparators);
  if (!args.quiet)
    std::cout << "diagnose: " << curves.size() << " posterior curves, " << comparators.size()
              << " comparator curves in " << config.output_dir << "\n";
  return 0;
}

int cmd_stats(const CliArgs& args) {
  const star::RunConfig config = load_config(args);
  if (config.panel_path.empty()) throw star::ValidationError("config needs data.panel");
  const star::DynamicNetwork net = star::read_panel(config.panel_path);
  if (net.directed != config.model.directed)
    throw star::ValidationError("panel directedness does not match model.directed");

  std::vector<std::pair<int, star::LagStatTensor>> stats;
  std::vector<std::pair<int, star::CovarianceBases>> bases;
  for (int t = config.model.lag_depth; t <= net.step_count(); ++t) {
    stats.emplace_back(t, star::build_lag_stats(net, t, config.model.stats, config.model.lag_depth));
    const star::Matrix& A_prev = net.snapshots[static_cast<std::size_t>(t - 1)];
    bases.emplace_back(t, net.directed ? star::build_H_directed(A_prev) : star::build_H_undirected(A_prev));
  }
  star::write_stats_csv(out_path(config, "stats.csv"), stats);
  star::write_bases_csv(out_path(config, "bases.csv"), bases);
  if (!args.quiet) std::cout << "stats: " << stats.size() << " transitions in " << config.output_dir << "\n";
  return 0;
}

int fail(const std::string& type, const std::string& message, int code) {
  json err;
  err["error"]["type"] = type;
  err["error"]["message"] = message;
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic network model: fit, simulate, diagnose, stats"};
  app.require_subcommand(1);

  CliArgs args;
  app.add_option("--config", args.config_path, "Path to the JSON run configuration")->required();
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Override the config seed");
  int workers_value = 0;
  auto* workers_opt = app.add_option("--workers", workers_value, "Override the config worker count");
  app.add_flag("--quiet", args.quiet, "Suppress progress output");

  auto* fit_cmd = app.add_subcommand("fit", "Fit the model to a panel file");
  auto* sim_cmd = app.add_subcommand("simulate", "Generate synthetic networks");
  auto* diag_cmd = app.add_subcommand("diagnose", "Fit and export dependence diagnostics");
  auto* stats_cmd = app.add_subcommand("stats", "Export lagged stats and covariance bases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }
  if (seed_opt->count()) args.seed = seed_value;
  if (workers_opt->count()) args.workers = workers_value;

  try {
    if (fit_cmd->parsed()) return cmd_fit(args);
    if (sim_cmd->parsed()) return cmd_simulate(args);
    if (diag_cmd->parsed()) return cmd_diagnose(args);
    if (stats_cmd->parsed()) return cmd_stats(args);
    return fail("validation", "no subcommand", 2);
  } catch (const star::ValidationError& e) {
    return fail("validation", e.what(), 2);
  } catch (const star::NumericalError& e) {
    return fail("numerical", e.what(), 3);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 3);
  }
}
