#include "star/vb.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "star/errors.hpp"
#include "star/special.hpp"

namespace star {

namespace {

void require_finite(const VariationalState& state, const char* update) {
  auto bad = [](const auto& m) { return !m.allFinite(); };
  bool any = bad(state.mu_m);
  for (const auto& m : state.E_latent) any = any || bad(m);
  for (const auto& v : state.mu_s1) any = any || bad(v);
  for (const auto& v : state.mu_s2) any = any || bad(v);
  for (const auto& v : state.mu_r1) any = any || bad(v);
  for (const auto& v : state.mu_r2) any = any || bad(v);
  for (const auto& v : state.mu_s) any = any || bad(v);
  for (const auto& m : state.M_R) any = any || bad(m);
  if (any || !std::isfinite(state.b_s) || !std::isfinite(state.b_r) || !std::isfinite(state.b_R))
    throw NumericalError(std::string("fit diverged: non-finite values after ") + update);
}

Matrix jittered_inverse(const Matrix& H, double jitter) {
  Matrix Hj = H;
  Hj.diagonal().array() += jitter;
  Eigen::LLT<Matrix> llt(Hj);
  if (llt.info() != Eigen::Success)
    throw NumericalError("similarity basis not positive definite even after jitter");
  return llt.solve(Matrix::Identity(H.rows(), H.cols()));
}

// Current expected latent matrix for transition k (or the raw location under
// the debug reading).
const Matrix& latent(const VbProblem& problem, const VariationalState& state, int k) {
  return problem.options.use_raw_locations ? state.M_A[static_cast<std::size_t>(k)]
                                           : state.E_latent[static_cast<std::size_t>(k)];
}

Vector sender_effect_sum(const VbProblem& problem, const VariationalState& state, int k) {
  const int n = problem.n;
  if (problem.spec.covariance_design == CovarianceDesign::kNone) return Vector::Zero(n);
  if (!problem.spec.directed) return state.mu_s[static_cast<std::size_t>(k)];
  Vector s = state.mu_s1[static_cast<std::size_t>(k)];
  if (!state.mu_s2[static_cast<std::size_t>(k)].size()) return s;
  return s + state.mu_s2[static_cast<std::size_t>(k)];
}

Vector receiver_effect_sum(const VbProblem& problem, const VariationalState& state, int k) {
  const int n = problem.n;
  if (problem.spec.covariance_design == CovarianceDesign::kNone || !problem.spec.directed)
    return Vector::Zero(n);
  Vector r = state.mu_r1[static_cast<std::size_t>(k)];
  if (!state.mu_r2[static_cast<std::size_t>(k)].size()) return r;
  return r + state.mu_r2[static_cast<std::size_t>(k)];
}

// Fixed mean-structure matrix X_t beta + G_t theta for transition k.
Matrix fixed_mean(const VbProblem& problem, const VariationalState& state, int k) {
  const Vector v = problem.Xvec[static_cast<std::size_t>(k)] * state.mu_m;
  return problem.spec.directed ? unvec_minus_diag(v, problem.n) : unvec_lower_pairs(v, problem.n);
}

void zero_diag(Matrix& M) { M.diagonal().setZero(); }

}  // namespace

int VbProblem::effect_dim() const {
  if (spec.covariance_design == CovarianceDesign::kNone) return 0;
  if (!spec.directed) return n;
  return spec.covariance_design == CovarianceDesign::kFull ? 4 * n : 2 * n;
}

VbProblem prepare_problem(const DynamicNetwork& data, const CovariateTensor& covariates,
                          const StarModelSpec& spec, const FitOptions& options) {
  spec.validate();
  if (options.tolerance <= 0) throw ValidationError("tolerance must be positive");
  if (options.jitter < 0) throw ValidationError("jitter must be nonnegative");
  if (options.max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  const int n = data.actor_count();
  const int T_total = data.step_count();
  if (T_total < 1) throw ValidationError("need at least two snapshots (T >= 1) to fit");
  if (data.directed != spec.directed)
    throw ValidationError("network directedness does not match the model spec");
  if (T_total < spec.lag_depth)
    throw ValidationError("T must be >= lag_depth");
  covariates.validate(n, T_total);

  VbProblem problem;
  problem.spec = spec;
  problem.options = options;
  problem.n = n;
  problem.first_t = spec.lag_depth;
  problem.T = T_total - spec.lag_depth + 1;
  problem.p1 = covariates.covariate_count();
  problem.covariate_labels = covariates.labels;
  for (int l = 0; l < problem.p1; ++l)
    if (static_cast<int>(problem.covariate_labels.size()) <= l)
      problem.covariate_labels.push_back("x" + std::to_string(l + 1));

  const bool directed = spec.directed;
  auto dyad_vec = [&](const Matrix& M) { return directed ? vec_minus_diag(M) : vec_lower_pairs(M); };

  for (int k = 0; k < problem.T; ++k) {
    const int t = problem.first_t + k;
    const LagStatTensor stats = build_lag_stats(data, t, spec.stats, spec.lag_depth);
    if (k == 0) {
      problem.stat_labels = stats.labels;
      problem.p2 = static_cast<int>(stats.slices.size());
      if (problem.p1 + problem.p2 == 0) throw ValidationError("model has no covariates and no stats");
    }
    const int p = problem.p1 + problem.p2;
    Matrix X(problem.dyads(), p);
    for (int l = 0; l < problem.p1; ++l)
      X.col(l) = dyad_vec(covariates.slices[static_cast<std::size_t>(l)][static_cast<std::size_t>(t - 1)]);
    for (int l = 0; l < problem.p2; ++l)
      X.col(problem.p1 + l) = dyad_vec(stats.slices[static_cast<std::size_t>(l)]);
    problem.Xvec.push_back(std::move(X));
    problem.A.push_back(data.snapshots[static_cast<std::size_t>(t)]);

    if (spec.covariance_design != CovarianceDesign::kNone) {
      const Matrix& A_prev = data.snapshots[static_cast<std::size_t>(t - 1)];
      if (directed && spec.covariance_design == CovarianceDesign::kFull) {
        const CovarianceBases bases = build_H_directed(A_prev);
        problem.Hs_inv.push_back(jittered_inverse(bases.sender[1], options.jitter));
        problem.Hr_inv.push_back(jittered_inverse(bases.receiver[1], options.jitter));
      } else if (!directed) {
        const CovarianceBases bases = build_H_undirected(A_prev);
        problem.Hs_inv.push_back(jittered_inverse(bases.sender[0], options.jitter));
      }
    }
  }

  const int p = problem.p1 + problem.p2;
  Vector prior_diag(p);
  prior_diag.head(problem.p1).setConstant(1.0 / spec.priors.sigma2_beta);
  prior_diag.tail(problem.p2).setConstant(1.0 / spec.priors.sigma2_theta);
  problem.prior_precision = prior_diag.asDiagonal();
  Matrix precision = problem.prior_precision;
  for (const auto& X : problem.Xvec) precision += X.transpose() * X;
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success)
    throw NumericalError("coefficient precision is singular despite proper priors");
  problem.sigma_m = llt.solve(Matrix::Identity(p, p));
  return problem;
}

VariationalState initial_state(const VbProblem& problem) {
  const int n = problem.n;
  const int p = problem.p1 + problem.p2;
  VariationalState st;
  st.mu_m = Vector::Zero(p);
  st.sigma_m = problem.sigma_m;
  const PriorSet& pr = problem.spec.priors;
  st.a_s = pr.a_s0;
  st.b_s = pr.b_s0;
  st.a_r = pr.a_r0;
  st.b_r = pr.b_r0;
  st.a_omega = pr.a_omega0;
  st.B_omega = pr.B_omega0;
  st.a_R = pr.a_R0;
  st.b_R = pr.b_R0;
  st.sigma2_R_tilde = 0.0;

  const bool effects = problem.spec.covariance_design != CovarianceDesign::kNone;
  const bool full = problem.spec.covariance_design == CovarianceDesign::kFull;
  for (int k = 0; k < problem.T; ++k) {
    st.M_A.push_back(Matrix::Zero(n, n));
    st.E_latent.push_back(Matrix::Zero(n, n));
    st.M_R.push_back(Matrix::Zero(n, n));
    if (problem.spec.directed) {
      st.mu_s1.push_back(effects ? Vector::Zero(n) : Vector());
      st.mu_r1.push_back(effects ? Vector::Zero(n) : Vector());
      st.mu_s2.push_back(effects && full ? Vector::Zero(n) : Vector());
      st.mu_r2.push_back(effects && full ? Vector::Zero(n) : Vector());
    } else {
      st.mu_s.push_back(effects ? Vector::Zero(n) : Vector());
    }
    const int dim = problem.effect_dim();
    if (problem.spec.directed)
      st.sigma_sr.push_back(dim ? Matrix::Zero(dim, dim) : Matrix());
    else
      st.sigma_s.push_back(dim ? Matrix::Zero(dim, dim) : Matrix());
  }
  return st;
}

void update_latents(const VbProblem& problem, VariationalState& state) {
  const int n = problem.n;
  for (int k = 0; k < problem.T; ++k) {
    Matrix M = fixed_mean(problem, state, k);
    if (problem.spec.covariance_design != CovarianceDesign::kNone) {
      if (problem.spec.directed) {
        const Vector s = sender_effect_sum(problem, state, k);
        const Vector r = receiver_effect_sum(problem, state, k);
        M += s * Vector::Ones(n).transpose() + Vector::Ones(n) * r.transpose();
        M += state.M_R[static_cast<std::size_t>(k)];
      } else {
        const Vector& s = state.mu_s[static_cast<std::size_t>(k)];
        M += s * Vector::Ones(n).transpose() + Vector::Ones(n) * s.transpose();
      }
    }
    zero_diag(M);
    Matrix& E = state.E_latent[static_cast<std::size_t>(k)];
    const Matrix& A = problem.A[static_cast<std::size_t>(k)];
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        E(i, j) = (i == j) ? 0.0 : truncnorm_mean(M(i, j), A(i, j) > 0.5);
    state.M_A[static_cast<std::size_t>(k)] = std::move(M);
  }
}

void update_coefficients(const VbProblem& problem, VariationalState& state) {
  const int n = problem.n;
  const int p = problem.p1 + problem.p2;
  Vector rhs = Vector::Zero(p);
  for (int k = 0; k < problem.T; ++k) {
    Matrix resid = latent(problem, state, k);
    if (problem.spec.covariance_design != CovarianceDesign::kNone) {
      if (problem.spec.directed) {
        const Vector s = sender_effect_sum(problem, state, k);
        const Vector r = receiver_effect_sum(problem, state, k);
        resid -= s * Vector::Ones(n).transpose() + Vector::Ones(n) * r.transpose();
        resid -= state.M_R[static_cast<std::size_t>(k)];
      } else {
        const Vector& s = state.mu_s[static_cast<std::size_t>(k)];
        resid -= s * Vector::Ones(n).transpose() + Vector::Ones(n) * s.transpose();
      }
    }
    zero_diag(resid);
    const Vector v = problem.spec.directed ? vec_minus_diag(resid) : vec_lower_pairs(resid);
    rhs += problem.Xvec[static_cast<std::size_t>(k)].transpose() * v;
  }
  state.mu_m = problem.sigma_m * rhs;
  state.sigma_m = problem.sigma_m;
}

namespace {

// Solves the effect system for one transition; retries once with extra ridge.
void solve_effects(const VbProblem& problem, int k, const Matrix& Q, const Vector& rhs, Vector& mean,
                   Matrix& cov) {
  Eigen::LLT<Matrix> llt(Q);
  if (llt.info() != Eigen::Success) {
    Matrix Qj = Q;
    Qj.diagonal().array() += problem.options.jitter;
    llt.compute(Qj);
    if (llt.info() != Eigen::Success)
      throw NumericalError("actor-effect precision factorization failed at transition " + std::to_string(k) +
                           " even after jitter " + std::to_string(problem.options.jitter));
  }
  mean = llt.solve(rhs);
  cov = llt.solve(Matrix::Identity(Q.rows(), Q.cols()));
}

}  // namespace

void update_actor_effects(const VbProblem& problem, VariationalState& state) {
  if (problem.spec.covariance_design == CovarianceDesign::kNone) return;
  const int n = problem.n;
  const Matrix off_ones = Matrix::Ones(n, n) - Matrix::Identity(n, n);

  if (!problem.spec.directed) {
    for (int k = 0; k < problem.T; ++k) {
      Matrix Q = (n - 1) * Matrix::Identity(n, n) + off_ones +
                 (state.a_s / state.b_s) * problem.Hs_inv[static_cast<std::size_t>(k)];
      Matrix resid = latent(problem, state, k) - fixed_mean(problem, state, k);
      zero_diag(resid);
      const Vector rhs = resid.rowwise().sum();
      solve_effects(problem, k, Q, rhs, state.mu_s[static_cast<std::size_t>(k)],
                    state.sigma_s[static_cast<std::size_t>(k)]);
    }
    return;
  }

  const bool full = problem.spec.covariance_design == CovarianceDesign::kFull;
  const int blocks = full ? 4 : 2;
  const int dim = blocks * n;
  // Block slots: 0 = identity sender, 1 = identity receiver, then the
  // similarity sender/receiver pair under the full design.
  const bool sender_slot[4] = {true, false, true, false};
  const Matrix omega_prec = state.a_omega * state.B_omega.inverse();

  for (int k = 0; k < problem.T; ++k) {
    Matrix Q = Matrix::Zero(dim, dim);
    for (int a = 0; a < blocks; ++a)
      for (int b = 0; b < blocks; ++b) {
        if (sender_slot[a] == sender_slot[b])
          Q.block(a * n, b * n, n, n).diagonal().setConstant(static_cast<double>(n - 1));
        else
          Q.block(a * n, b * n, n, n) = off_ones;
      }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) Q.block(a * n, b * n, n, n).diagonal().array() += omega_prec(a, b);
    if (full) {
      Q.block(2 * n, 2 * n, n, n) += (state.a_s / state.b_s) * problem.Hs_inv[static_cast<std::size_t>(k)];
      Q.block(3 * n, 3 * n, n, n) += (state.a_r / state.b_r) * problem.Hr_inv[static_cast<std::size_t>(k)];
    }

    Matrix resid = latent(problem, state, k) - fixed_mean(problem, state, k) -
                   state.M_R[static_cast<std::size_t>(k)];
    zero_diag(resid);
    const Vector row_sum = resid.rowwise().sum();
    const Vector col_sum = resid.colwise().sum().transpose();
    Vector rhs(dim);
    rhs.segment(0, n) = row_sum;
    rhs.segment(n, n) = col_sum;
    if (full) {
      rhs.segment(2 * n, n) = row_sum;
      rhs.segment(3 * n, n) = col_sum;
    }

    Vector mean;
    solve_effects(problem, k, Q, rhs, mean, state.sigma_sr[static_cast<std::size_t>(k)]);
    state.mu_s1[static_cast<std::size_t>(k)] = mean.segment(0, n);
    state.mu_r1[static_cast<std::size_t>(k)] = mean.segment(n, n);
    if (full) {
      state.mu_s2[static_cast<std::size_t>(k)] = mean.segment(2 * n, n);
      state.mu_r2[static_cast<std::size_t>(k)] = mean.segment(3 * n, n);
    }
  }
}

void update_pair_effects(const VbProblem& problem, VariationalState& state) {
  if (!problem.spec.directed || problem.spec.covariance_design == CovarianceDesign::kNone) return;
  const int n = problem.n;
  const double ratio = state.b_R / state.a_R;
  state.sigma2_R_tilde = ratio / (1.0 + 2.0 * ratio);
  for (int k = 0; k < problem.T; ++k) {
    Matrix resid = latent(problem, state, k) - fixed_mean(problem, state, k);
    const Vector s = sender_effect_sum(problem, state, k);
    const Vector r = receiver_effect_sum(problem, state, k);
    resid -= s * Vector::Ones(n).transpose() + Vector::Ones(n) * r.transpose();
    zero_diag(resid);
    Matrix M = state.sigma2_R_tilde * (resid + resid.transpose());
    zero_diag(M);
    state.M_R[static_cast<std::size_t>(k)] = std::move(M);
  }
}

void update_variance_components(const VbProblem& problem, VariationalState& state) {
  if (problem.spec.covariance_design == CovarianceDesign::kNone) return;
  const int n = problem.n;
  const PriorSet& pr = problem.spec.priors;
  const double nT = static_cast<double>(n) * problem.T;

  if (!problem.spec.directed) {
    state.a_s = pr.a_s0 + 0.5 * nT;
    double b = pr.b_s0;
    for (int k = 0; k < problem.T; ++k) {
      const Matrix& H_inv = problem.Hs_inv[static_cast<std::size_t>(k)];
      const Vector& mu = state.mu_s[static_cast<std::size_t>(k)];
      b += 0.5 * (state.sigma_s[static_cast<std::size_t>(k)].cwiseProduct(H_inv).sum() +
                  mu.dot(H_inv * mu));
    }
    state.b_s = b;
    return;
  }

  state.a_omega = pr.a_omega0 + nT;
  Matrix B = pr.B_omega0;
  for (int k = 0; k < problem.T; ++k) {
    const Matrix& S = state.sigma_sr[static_cast<std::size_t>(k)];
    const Vector& s1 = state.mu_s1[static_cast<std::size_t>(k)];
    const Vector& r1 = state.mu_r1[static_cast<std::size_t>(k)];
    for (int i = 0; i < n; ++i) {
      B(0, 0) += S(i, i) + s1(i) * s1(i);
      B(0, 1) += S(i, n + i) + s1(i) * r1(i);
      B(1, 0) += S(n + i, i) + r1(i) * s1(i);
      B(1, 1) += S(n + i, n + i) + r1(i) * r1(i);
    }
  }
  state.B_omega = B;

  if (problem.spec.covariance_design == CovarianceDesign::kFull) {
    state.a_s = pr.a_s0 + 0.5 * nT;
    state.a_r = pr.a_r0 + 0.5 * nT;
    double bs = pr.b_s0, br = pr.b_r0;
    for (int k = 0; k < problem.T; ++k) {
      const Matrix& S = state.sigma_sr[static_cast<std::size_t>(k)];
      const Matrix& Hs = problem.Hs_inv[static_cast<std::size_t>(k)];
      const Matrix& Hr = problem.Hr_inv[static_cast<std::size_t>(k)];
      const Vector& s2 = state.mu_s2[static_cast<std::size_t>(k)];
      const Vector& r2 = state.mu_r2[static_cast<std::size_t>(k)];
      bs += 0.5 * (S.block(2 * n, 2 * n, n, n).cwiseProduct(Hs).sum() + s2.dot(Hs * s2));
      br += 0.5 * (S.block(3 * n, 3 * n, n, n).cwiseProduct(Hr).sum() + r2.dot(Hr * r2));
    }
    state.b_s = bs;
    state.b_r = br;
  }
}

void update_pair_variance(const VbProblem& problem, VariationalState& state) {
  if (!problem.spec.directed || problem.spec.covariance_design == CovarianceDesign::kNone) return;
  const int n = problem.n;
  const PriorSet& pr = problem.spec.priors;
  state.a_R = pr.a_R0 + 0.25 * problem.T * n * (n - 1);
  double b = pr.b_R0;
  const double pairs = 0.5 * n * (n - 1);
  for (int k = 0; k < problem.T; ++k)
    b += 0.5 * (pairs * state.sigma2_R_tilde + 0.5 * state.M_R[static_cast<std::size_t>(k)].squaredNorm());
  state.b_R = b;
}

namespace {

double state_delta(const VariationalState& a, const VariationalState& b) {
  double d = (a.mu_m - b.mu_m).cwiseAbs().maxCoeff();
  auto upd = [&d](const Vector& x, const Vector& y) {
    if (x.size() && y.size()) d = std::max(d, (x - y).cwiseAbs().maxCoeff());
  };
  for (std::size_t k = 0; k < a.mu_s1.size(); ++k) {
    upd(a.mu_s1[k], b.mu_s1[k]);
    upd(a.mu_r1[k], b.mu_r1[k]);
    upd(a.mu_s2[k], b.mu_s2[k]);
    upd(a.mu_r2[k], b.mu_r2[k]);
  }
  for (std::size_t k = 0; k < a.mu_s.size(); ++k) upd(a.mu_s[k], b.mu_s[k]);
  return d;
}

void summarize_inverse_gamma(double a, double b, double& mean, double& sd) {
  mean = a > 1 ? b / (a - 1) : std::numeric_limits<double>::quiet_NaN();
  sd = a > 2 ? b / ((a - 1) * std::sqrt(a - 2)) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

FitReport fit(const DynamicNetwork& data, const CovariateTensor& covariates, const StarModelSpec& spec,
              const FitOptions& options) {
  VbProblem problem = prepare_problem(data, covariates, spec, options);
  VariationalState state = initial_state(problem);

  const bool effects = spec.covariance_design != CovarianceDesign::kNone;
  FitReport report;
  report.spec = spec;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const VariationalState previous = state;
    update_latents(problem, state);
    require_finite(state, "latent update");
    update_coefficients(problem, state);
    require_finite(state, "coefficient update");
    if (effects) {
      update_actor_effects(problem, state);
      require_finite(state, "actor-effect update");
      if (spec.directed) {
        update_pair_effects(problem, state);
        require_finite(state, "pair-effect update");
      }
      update_variance_components(problem, state);
      require_finite(state, "variance-component update");
      if (spec.directed) {
        update_pair_variance(problem, state);
        require_finite(state, "pair-variance update");
      }
    }
    const double delta = state_delta(state, previous);
    report.trace.push_back(delta);
    report.iterations = iter;
    if (delta < options.tolerance) {
      report.converged = true;
      break;
    }
  }

  const int p1 = problem.p1, p2 = problem.p2;
  report.beta_labels = problem.covariate_labels;
  report.theta_labels = problem.stat_labels;
  report.beta.mean = state.mu_m.head(p1);
  report.theta.mean = state.mu_m.tail(p2);
  const Vector sd = problem.sigma_m.diagonal().cwiseSqrt();
  report.beta.sd = sd.head(p1);
  report.theta.sd = sd.tail(p2);

  if (effects) {
    if (spec.directed) {
      if (spec.covariance_design == CovarianceDesign::kFull) {
        summarize_inverse_gamma(state.a_s, state.b_s, report.tau_s2_mean, report.tau_s2_sd);
        summarize_inverse_gamma(state.a_r, state.b_r, report.tau_r2_mean, report.tau_r2_sd);
      }
      const double nu = state.a_omega;
      report.omega_mean = state.B_omega / (nu - 3.0);
      report.omega_sd = Matrix::Zero(2, 2);
      if (nu > 5.0) {
        const Matrix& B = state.B_omega;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            const double var =
                ((nu - 1.0) * B(i, j) * B(i, j) + (nu - 3.0) * B(i, i) * B(j, j)) /
                ((nu - 2.0) * (nu - 3.0) * (nu - 3.0) * (nu - 5.0));
            report.omega_sd(i, j) = std::sqrt(var);
          }
      }
      summarize_inverse_gamma(state.a_R, state.b_R, report.sigma2_R_mean, report.sigma2_R_sd);
    } else {
      summarize_inverse_gamma(state.a_s, state.b_s, report.tau_s_mean, report.tau_s_sd);
    }
  }

  report.state = std::move(state);
  report.problem = std::move(problem);
  return report;
}

}  // namespace star
