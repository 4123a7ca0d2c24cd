#include "star/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "star/errors.hpp"

namespace star {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

long parse_long(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(context + ": not an integer: '" + s + "'");
  }
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(context + ": not a number: '" + s + "'");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", x);
  if (std::strtod(buf, nullptr) != x) std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

DynamicNetwork read_panel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open panel file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  // Header: # star-panel v1 directed=<true|false> n=<n> T=<T>
  std::stringstream header(line);
  std::string hash, name, version, token;
  header >> hash >> name >> version;
  if (hash != "#" || name != "star-panel" || version != "v1")
    throw ValidationError(path + ":1: malformed header, expected '# star-panel v1 ...'");
  bool directed = true, saw_directed = false;
  long n = 0, T = -1;
  while (header >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ValidationError(path + ":1: malformed header token '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "directed") {
      if (value != "true" && value != "false")
        throw ValidationError(path + ":1: directed must be true or false");
      directed = value == "true";
      saw_directed = true;
    } else if (key == "n") {
      n = parse_long(value, path + ":1: n");
    } else if (key == "T") {
      T = parse_long(value, path + ":1: T");
    } else {
      throw ValidationError(path + ":1: unknown header key '" + key + "'");
    }
  }
  if (!saw_directed) throw ValidationError(path + ":1: header is missing directed=");
  if (n < 2) throw ValidationError(path + ":1: header needs n >= 2");
  if (T < 0) throw ValidationError(path + ":1: header needs T >= 0");

  struct Row {
    long t, i, j;
  };
  std::vector<Row> rows;
  std::set<long> ids;
  long line_no = 1;
  bool saw_column_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!saw_column_header && line == "t,i,j") {
      saw_column_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != 3) throw ValidationError(where + ": expected 3 fields t,i,j");
    Row row{parse_long(fields[0], where + ": t"), parse_long(fields[1], where + ": i"),
            parse_long(fields[2], where + ": j")};
    if (row.t < 0 || row.t > T)
      throw ValidationError(where + ": t=" + std::to_string(row.t) + " outside 0.." + std::to_string(T));
    if (row.i == row.j) throw ValidationError(where + ": self loop " + std::to_string(row.i));
    rows.push_back(row);
    ids.insert(row.i);
    ids.insert(row.j);
  }

  // Dense 1..n ids pass through; anything else is re-indexed by sorted order.
  std::map<long, int> index;
  std::vector<long> labels;
  const bool dense = ids.empty() || (*ids.begin() >= 1 && *ids.rbegin() <= n);
  if (dense) {
    labels.resize(static_cast<std::size_t>(n));
    for (long a = 1; a <= n; ++a) {
      labels[static_cast<std::size_t>(a - 1)] = a;
      index[a] = static_cast<int>(a - 1);
    }
  } else {
    if (static_cast<long>(ids.size()) > n)
      throw ValidationError(path + ": " + std::to_string(ids.size()) + " distinct actor ids exceed n=" +
                            std::to_string(n));
    for (const long id : ids) {
      index[id] = static_cast<int>(labels.size());
      labels.push_back(id);
    }
    long next = ids.empty() ? 1 : *ids.rbegin() + 1;
    while (static_cast<long>(labels.size()) < n) labels.push_back(next++);
  }

  std::vector<Matrix> snapshots(static_cast<std::size_t>(T + 1),
                                Matrix::Zero(static_cast<int>(n), static_cast<int>(n)));
  for (const auto& row : rows) {
    const int i = index.at(row.i);
    const int j = index.at(row.j);
    Matrix& A = snapshots[static_cast<std::size_t>(row.t)];
    A(i, j) = 1.0;
    if (!directed) A(j, i) = 1.0;
  }
  DynamicNetwork net = DynamicNetwork::from_snapshots(std::move(snapshots), directed);
  net.labels = std::move(labels);
  return net;
}

void write_panel(const std::string& path, const DynamicNetwork& network) {
  auto out = open_out(path);
  const int n = network.actor_count();
  out << "# star-panel v1 directed=" << (network.directed ? "true" : "false") << " n=" << n
      << " T=" << network.step_count() << "\n";
  out << "t,i,j\n";
  for (std::size_t t = 0; t < network.snapshots.size(); ++t) {
    const Matrix& A = network.snapshots[t];
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (i == j || A(i, j) == 0.0) continue;
        if (!network.directed && i > j) continue;
        out << t << "," << network.labels[static_cast<std::size_t>(i)] << ","
            << network.labels[static_cast<std::size_t>(j)] << "\n";
      }
  }
}

Matrix read_dense_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open CSV: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_double(f, path + ":" + std::to_string(line_no)));
    if (!rows.empty() && rows.front().size() != row.size())
      throw ValidationError(path + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path + ": empty CSV");
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return M;
}

void write_dense_csv(const std::string& path, const Matrix& M) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out << ",";
      out << format_double(M(i, j));
    }
    out << "\n";
  }
}

namespace {

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ValidationError("unknown config key: " + path + "." + key);
}

const json* find(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError("config key " + path + ": expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ValidationError("config key " + path + ": expected an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ValidationError("config key " + path + ": expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ValidationError("config key " + path + ": expected a string");
  return v.get<std::string>();
}

Vector as_vector(const json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError("config key " + path + ": expected an array of numbers");
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = as_double(v[i], path);
  return out;
}

Matrix as_matrix2(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw ValidationError("config key " + path + ": expected a 2x2 array");
  Matrix M(2, 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const Vector row = as_vector(v[i], path);
    if (row.size() != 2) throw ValidationError("config key " + path + ": expected a 2x2 array");
    M.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return M;
}

void parse_model(const json& obj, StarModelSpec& spec) {
  check_keys(obj, "model", {"directed", "stats", "covariance_design", "lag_depth"});
  if (const json* v = find(obj, "directed")) spec.directed = as_bool(*v, "model.directed");
  spec.stats = spec.directed ? directed_stat_names() : undirected_stat_names();
  if (const json* v = find(obj, "stats")) {
    if (!v->is_array()) throw ValidationError("config key model.stats: expected an array of strings");
    spec.stats.clear();
    for (const auto& s : *v) spec.stats.push_back(as_string(s, "model.stats"));
  }
  if (const json* v = find(obj, "covariance_design"))
    spec.covariance_design = covariance_design_from_string(as_string(*v, "model.covariance_design"));
  if (const json* v = find(obj, "lag_depth")) spec.lag_depth = as_int(*v, "model.lag_depth");
}

void parse_priors(const json& obj, PriorSet& priors) {
  check_keys(obj, "priors",
             {"sigma2_beta", "sigma2_theta", "a_s0", "b_s0", "a_r0", "b_r0", "a_R0", "b_R0", "a_omega0",
              "B_omega0"});
  if (const json* v = find(obj, "sigma2_beta")) priors.sigma2_beta = as_double(*v, "priors.sigma2_beta");
  if (const json* v = find(obj, "sigma2_theta")) priors.sigma2_theta = as_double(*v, "priors.sigma2_theta");
  if (const json* v = find(obj, "a_s0")) priors.a_s0 = as_double(*v, "priors.a_s0");
  if (const json* v = find(obj, "b_s0")) priors.b_s0 = as_double(*v, "priors.b_s0");
  if (const json* v = find(obj, "a_r0")) priors.a_r0 = as_double(*v, "priors.a_r0");
  if (const json* v = find(obj, "b_r0")) priors.b_r0 = as_double(*v, "priors.b_r0");
  if (const json* v = find(obj, "a_R0")) priors.a_R0 = as_double(*v, "priors.a_R0");
  if (const json* v = find(obj, "b_R0")) priors.b_R0 = as_double(*v, "priors.b_R0");
  if (const json* v = find(obj, "a_omega0")) priors.a_omega0 = as_double(*v, "priors.a_omega0");
  if (const json* v = find(obj, "B_omega0")) priors.B_omega0 = as_matrix2(*v, "priors.B_omega0");
}

void parse_fit(const json& obj, FitOptions& options) {
  check_keys(obj, "fit", {"max_iterations", "tolerance", "jitter", "trace", "use_raw_locations"});
  if (const json* v = find(obj, "max_iterations")) options.max_iterations = as_int(*v, "fit.max_iterations");
  if (const json* v = find(obj, "tolerance")) options.tolerance = as_double(*v, "fit.tolerance");
  if (const json* v = find(obj, "jitter")) options.jitter = as_double(*v, "fit.jitter");
  if (const json* v = find(obj, "trace")) options.trace = as_bool(*v, "fit.trace");
  if (const json* v = find(obj, "use_raw_locations"))
    options.use_raw_locations = as_bool(*v, "fit.use_raw_locations");
}

void parse_data(const json& obj, RunConfig& config) {
  check_keys(obj, "data", {"panel", "covariates", "truth"});
  if (const json* v = find(obj, "panel")) config.panel_path = as_string(*v, "data.panel");
  if (const json* v = find(obj, "truth")) config.truth_path = as_string(*v, "data.truth");
  if (const json* v = find(obj, "covariates")) {
    if (!v->is_array()) throw ValidationError("config key data.covariates: expected an array");
    for (std::size_t c = 0; c < v->size(); ++c) {
      const json& entry = (*v)[c];
      const std::string path = "data.covariates[" + std::to_string(c) + "]";
      if (!entry.is_object()) throw ValidationError("config key " + path + ": expected an object");
      check_keys(entry, path, {"label", "intercept", "static_csv", "csv_per_step"});
      CovariateSource src;
      if (const json* w = find(entry, "label")) src.label = as_string(*w, path + ".label");
      if (const json* w = find(entry, "intercept")) src.intercept = as_bool(*w, path + ".intercept");
      if (const json* w = find(entry, "static_csv")) src.static_csv = as_string(*w, path + ".static_csv");
      if (const json* w = find(entry, "csv_per_step")) {
        if (!w->is_array()) throw ValidationError("config key " + path + ".csv_per_step: expected an array");
        for (const auto& p : *w) src.csv_per_step.push_back(as_string(p, path + ".csv_per_step"));
      }
      const int sources = (src.intercept ? 1 : 0) + (src.static_csv.empty() ? 0 : 1) +
                          (src.csv_per_step.empty() ? 0 : 1);
      if (sources != 1)
        throw ValidationError("config key " + path +
                              ": exactly one of intercept, static_csv, csv_per_step required");
      if (src.label.empty()) src.label = "x" + std::to_string(c + 1);
      config.covariates.push_back(std::move(src));
    }
  }
}

void parse_sim_params(const json& obj, SimulateSettings& sim, bool directed) {
  check_keys(obj, "simulate.params", {"beta", "theta", "tau_s2", "tau_r2", "omega", "sigma2_R", "tau_s"});
  if (directed) {
    ModelParams params;
    if (const json* v = find(obj, "beta")) params.beta = as_vector(*v, "simulate.params.beta");
    if (const json* v = find(obj, "theta")) params.theta = as_vector(*v, "simulate.params.theta");
    if (const json* v = find(obj, "tau_s2")) params.tau_s2 = as_double(*v, "simulate.params.tau_s2");
    if (const json* v = find(obj, "tau_r2")) params.tau_r2 = as_double(*v, "simulate.params.tau_r2");
    if (const json* v = find(obj, "omega")) params.omega = as_matrix2(*v, "simulate.params.omega");
    if (const json* v = find(obj, "sigma2_R")) params.sigma2_R = as_double(*v, "simulate.params.sigma2_R");
    sim.params = std::move(params);
  } else {
    UndirectedModelParams params;
    if (const json* v = find(obj, "beta")) params.beta = as_vector(*v, "simulate.params.beta");
    if (const json* v = find(obj, "theta")) params.theta = as_vector(*v, "simulate.params.theta");
    if (const json* v = find(obj, "tau_s")) params.tau_s = as_double(*v, "simulate.params.tau_s");
    sim.params = std::move(params);
  }
}

void parse_simulate(const json& obj, RunConfig& config) {
  check_keys(obj, "simulate",
             {"n", "T", "initial_density", "replicates", "study", "with_dependence", "params"});
  SimulateSettings sim;
  if (const json* v = find(obj, "n")) sim.n = as_int(*v, "simulate.n");
  if (const json* v = find(obj, "T")) sim.T = as_int(*v, "simulate.T");
  if (const json* v = find(obj, "initial_density"))
    sim.initial_density = as_double(*v, "simulate.initial_density");
  if (const json* v = find(obj, "replicates")) sim.replicates = as_int(*v, "simulate.replicates");
  if (const json* v = find(obj, "study")) sim.study = as_bool(*v, "simulate.study");
  if (const json* v = find(obj, "with_dependence"))
    sim.with_dependence = as_bool(*v, "simulate.with_dependence");
  if (config.model.directed)
    sim.params = sim_study_truth(sim.with_dependence);
  else
    sim.params = UndirectedModelParams{};
  if (const json* v = find(obj, "params")) parse_sim_params(*v, sim, config.model.directed);
  config.simulate = std::move(sim);
}

void parse_diagnostics(const json& obj, DiagnosticsSettings& diag) {
  check_keys(obj, "diagnostics", {"draws", "grid_points", "p_values"});
  if (const json* v = find(obj, "draws")) diag.draws = as_int(*v, "diagnostics.draws");
  if (const json* v = find(obj, "grid_points")) diag.grid_points = as_int(*v, "diagnostics.grid_points");
  if (const json* v = find(obj, "p_values")) {
    const Vector p = as_vector(*v, "diagnostics.p_values");
    diag.p_values.assign(p.data(), p.data() + p.size());
  }
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config root must be an object");
  check_keys(doc, "(root)",
             {"seed", "workers", "output_dir", "model", "priors", "fit", "data", "simulate", "diagnostics"});
  RunConfig config;
  if (const json* v = find(doc, "seed")) {
    if (!v->is_number_integer()) throw ValidationError("config key seed: expected an integer");
    config.seed = v->get<std::uint64_t>();
  }
  if (const json* v = find(doc, "workers")) config.workers = as_int(*v, "workers");
  if (const json* v = find(doc, "output_dir")) config.output_dir = as_string(*v, "output_dir");
  if (const json* v = find(doc, "model")) parse_model(*v, config.model);
  if (config.model.stats.empty())
    config.model.stats = config.model.directed ? directed_stat_names() : undirected_stat_names();
  if (const json* v = find(doc, "priors")) parse_priors(*v, config.model.priors);
  if (const json* v = find(doc, "fit")) parse_fit(*v, config.fit_options);
  if (const json* v = find(doc, "data")) parse_data(*v, config);
  if (const json* v = find(doc, "simulate")) parse_simulate(*v, config);
  if (const json* v = find(doc, "diagnostics")) parse_diagnostics(*v, config.diagnostics);
  config.model.validate();
  return config;
}

CovariateTensor load_covariates(const RunConfig& config, int n, int T) {
  CovariateTensor cov;
  for (const auto& src : config.covariates) {
    std::vector<Matrix> steps;
    if (src.intercept) {
      steps.assign(static_cast<std::size_t>(T), Matrix::Ones(n, n));
    } else if (!src.static_csv.empty()) {
      Matrix M = read_dense_csv(src.static_csv);
      if (M.rows() != n || M.cols() != n)
        throw ValidationError(src.static_csv + ": expected " + std::to_string(n) + "x" + std::to_string(n));
      steps.assign(static_cast<std::size_t>(T), M);
    } else {
      if (static_cast<int>(src.csv_per_step.size()) != T)
        throw ValidationError("covariate " + src.label + ": expected " + std::to_string(T) +
                              " per-step files, got " + std::to_string(src.csv_per_step.size()));
      for (const auto& p : src.csv_per_step) {
        Matrix M = read_dense_csv(p);
        if (M.rows() != n || M.cols() != n)
          throw ValidationError(p + ": expected " + std::to_string(n) + "x" + std::to_string(n));
        steps.push_back(std::move(M));
      }
    }
    cov.slices.push_back(std::move(steps));
    cov.labels.push_back(src.label);
  }
  return cov;
}

namespace {

json params_to_json(const ModelParams& p) {
  json out;
  out["beta"] = std::vector<double>(p.beta.data(), p.beta.data() + p.beta.size());
  out["theta"] = std::vector<double>(p.theta.data(), p.theta.data() + p.theta.size());
  out["tau_s2"] = p.tau_s2;
  out["tau_r2"] = p.tau_r2;
  out["omega"] = {{p.omega(0, 0), p.omega(0, 1)}, {p.omega(1, 0), p.omega(1, 1)}};
  out["sigma2_R"] = p.sigma2_R;
  return out;
}

json params_to_json(const UndirectedModelParams& p) {
  json out;
  out["beta"] = std::vector<double>(p.beta.data(), p.beta.data() + p.beta.size());
  out["theta"] = std::vector<double>(p.theta.data(), p.theta.data() + p.theta.size());
  out["tau_s"] = p.tau_s;
  return out;
}

json summary_to_json(const std::vector<std::string>& labels, const ParamSummary& s) {
  json out;
  out["labels"] = labels;
  out["mean"] = std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size());
  out["sd"] = std::vector<double>(s.sd.data(), s.sd.data() + s.sd.size());
  return out;
}

}  // namespace

void write_fit_report_json(const std::string& path, const FitReport& report,
                           const std::string& truth_path) {
  json doc;
  doc["model"]["directed"] = report.spec.directed;
  doc["model"]["stats"] = report.theta_labels;
  doc["model"]["covariance_design"] = to_string(report.spec.covariance_design);
  doc["model"]["lag_depth"] = report.spec.lag_depth;
  doc["convergence"]["iterations"] = report.iterations;
  doc["convergence"]["converged"] = report.converged;
  doc["convergence"]["metric"] = report.convergence_metric;
  doc["convergence"]["trace"] = report.trace;
  doc["posterior"]["beta"] = summary_to_json(report.beta_labels, report.beta);
  doc["posterior"]["theta"] = summary_to_json(report.theta_labels, report.theta);
  if (report.spec.covariance_design != CovarianceDesign::kNone) {
    if (report.spec.directed) {
      if (report.spec.covariance_design == CovarianceDesign::kFull) {
        doc["posterior"]["tau_s2"] = {{"mean", report.tau_s2_mean}, {"sd", report.tau_s2_sd}};
        doc["posterior"]["tau_r2"] = {{"mean", report.tau_r2_mean}, {"sd", report.tau_r2_sd}};
      }
      doc["posterior"]["omega"] = {
          {"mean", {{report.omega_mean(0, 0), report.omega_mean(0, 1)},
                    {report.omega_mean(1, 0), report.omega_mean(1, 1)}}},
          {"sd", {{report.omega_sd(0, 0), report.omega_sd(0, 1)},
                  {report.omega_sd(1, 0), report.omega_sd(1, 1)}}}};
      doc["posterior"]["sigma2_R"] = {{"mean", report.sigma2_R_mean}, {"sd", report.sigma2_R_sd}};
    } else {
      doc["posterior"]["tau_s"] = {{"mean", report.tau_s_mean}, {"sd", report.tau_s_sd}};
    }
  }
  doc["concentrated_interval_warning"] = report.concentrated_interval_warning;

  if (!truth_path.empty()) {
    std::ifstream in(truth_path);
    if (!in) throw ValidationError("cannot open truth file: " + truth_path);
    json truth;
    try {
      truth = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ValidationError(std::string("truth parse error: ") + e.what());
    }
    json cmp;
    cmp["truth"] = truth.contains("params") ? truth["params"] : truth;
    cmp["posterior_mean"]["beta"] =
        std::vector<double>(report.beta.mean.data(), report.beta.mean.data() + report.beta.mean.size());
    cmp["posterior_mean"]["theta"] =
        std::vector<double>(report.theta.mean.data(), report.theta.mean.data() + report.theta.mean.size());
    if (report.spec.directed && report.spec.covariance_design == CovarianceDesign::kFull) {
      cmp["posterior_mean"]["tau_s2"] = report.tau_s2_mean;
      cmp["posterior_mean"]["tau_r2"] = report.tau_r2_mean;
      cmp["posterior_mean"]["sigma2_R"] = report.sigma2_R_mean;
      cmp["posterior_mean"]["omega"] = {{report.omega_mean(0, 0), report.omega_mean(0, 1)},
                                        {report.omega_mean(1, 0), report.omega_mean(1, 1)}};
    }
    if (!report.spec.directed && report.spec.covariance_design != CovarianceDesign::kNone)
      cmp["posterior_mean"]["tau_s"] = report.tau_s_mean;
    doc["truth_comparison"] = std::move(cmp);
  }

  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

void write_posterior_csv(const std::string& path, const FitReport& report) {
  auto out = open_out(path);
  out << "parameter,index,label,mean,sd\n";
  for (Eigen::Index i = 0; i < report.beta.mean.size(); ++i)
    out << "beta," << (i + 1) << "," << report.beta_labels[static_cast<std::size_t>(i)] << ","
        << format_double(report.beta.mean(i)) << "," << format_double(report.beta.sd(i)) << "\n";
  for (Eigen::Index i = 0; i < report.theta.mean.size(); ++i)
    out << "theta," << (i + 1) << "," << report.theta_labels[static_cast<std::size_t>(i)] << ","
        << format_double(report.theta.mean(i)) << "," << format_double(report.theta.sd(i)) << "\n";
  if (report.spec.covariance_design != CovarianceDesign::kNone) {
    if (report.spec.directed) {
      if (report.spec.covariance_design == CovarianceDesign::kFull) {
        out << "tau_s2,1,," << format_double(report.tau_s2_mean) << "," << format_double(report.tau_s2_sd)
            << "\n";
        out << "tau_r2,1,," << format_double(report.tau_r2_mean) << "," << format_double(report.tau_r2_sd)
            << "\n";
      }
      const char* names[4] = {"omega11", "omega12", "omega21", "omega22"};
      int k = 0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j, ++k)
          out << names[k] << ",1,," << format_double(report.omega_mean(i, j)) << ","
              << format_double(report.omega_sd(i, j)) << "\n";
      out << "sigma2_R,1,," << format_double(report.sigma2_R_mean) << ","
          << format_double(report.sigma2_R_sd) << "\n";
    } else {
      out << "tau_s,1,," << format_double(report.tau_s_mean) << "," << format_double(report.tau_s_sd)
          << "\n";
    }
  }
}

void write_ball_curves_csv(const std::string& path, const std::vector<BallCurve>& curves) {
  auto out = open_out(path);
  out << "label,epsilon,probability\n";
  for (const auto& c : curves)
    for (Eigen::Index g = 0; g < c.epsilons.size(); ++g)
      out << c.label << "," << format_double(c.epsilons(g)) << "," << format_double(c.probabilities(g))
          << "\n";
}

void write_sim_study_csv(const std::string& path, const std::vector<SimStudyRow>& rows) {
  auto out = open_out(path);
  out << "replicate,truth_model,fit_model,parameter,true_value,posterior_mean\n";
  for (const auto& r : rows) {
    out << r.replicate << "," << r.truth_model << "," << r.fit_model << "," << r.parameter << ","
        << format_double(r.true_value) << ",";
    if (!r.failed) out << format_double(r.posterior_mean);
    out << "\n";
  }
}

void write_truth_json(const std::string& path, const SimulateSettings& sim, std::uint64_t seed) {
  json doc;
  doc["seed"] = seed;
  doc["n"] = sim.n;
  doc["T"] = sim.T;
  doc["initial_density"] = sim.initial_density;
  if (const auto* p = std::get_if<ModelParams>(&sim.params)) {
    doc["directed"] = true;
    doc["params"] = params_to_json(*p);
  } else {
    doc["directed"] = false;
    doc["params"] = params_to_json(std::get<UndirectedModelParams>(sim.params));
  }
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

void write_stats_csv(const std::string& path, const std::vector<std::pair<int, LagStatTensor>>& stats) {
  auto out = open_out(path);
  out << "stat,t,i,j,value\n";
  for (const auto& [t, tensor] : stats)
    for (std::size_t l = 0; l < tensor.slices.size(); ++l) {
      const Matrix& M = tensor.slices[l];
      for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i)
          out << tensor.labels[l] << "," << t << "," << (i + 1) << "," << (j + 1) << ","
              << format_double(M(i, j)) << "\n";
    }
}

void write_bases_csv(const std::string& path, const std::vector<std::pair<int, CovarianceBases>>& bases) {
  auto out = open_out(path);
  out << "basis,t,i,j,value\n";
  auto dump = [&](const std::string& name, int t, const Matrix& M) {
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      for (Eigen::Index i = 0; i < M.rows(); ++i)
        out << name << "," << t << "," << (i + 1) << "," << (j + 1) << "," << format_double(M(i, j)) << "\n";
  };
  for (const auto& [t, b] : bases) {
    for (std::size_t k = 0; k < b.sender.size(); ++k) dump("sender" + std::to_string(k + 1), t, b.sender[k]);
    for (std::size_t k = 0; k < b.receiver.size(); ++k)
      dump("receiver" + std::to_string(k + 1), t, b.receiver[k]);
    for (std::size_t k = 0; k < b.cross.size(); ++k) dump("cross" + std::to_string(k + 1), t, b.cross[k]);
  }
}

}  // namespace star
