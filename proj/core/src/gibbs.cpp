#include "star/gibbs.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "star/errors.hpp"
#include "star/rng.hpp"
#include "star/vb.hpp"

namespace star {

namespace {

Vector quantile_columns(const Matrix& draws, double q) {
  Vector out(draws.cols());
  std::vector<double> col(static_cast<std::size_t>(draws.rows()));
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    for (Eigen::Index i = 0; i < draws.rows(); ++i) col[static_cast<std::size_t>(i)] = draws(i, j);
    std::sort(col.begin(), col.end());
    const double pos = q * (static_cast<double>(col.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, col.size() - 1);
    out(j) = col[lo] + (pos - static_cast<double>(lo)) * (col[hi] - col[lo]);
  }
  return out;
}

// Draw x ~ N(P^{-1} rhs, P^{-1}) given the precision P.
Vector precision_normal(Rng& rng, const Matrix& P, const Vector& rhs) {
  Eigen::LLT<Matrix> llt(P);
  if (llt.info() != Eigen::Success) throw NumericalError("gibbs: precision factorization failed");
  const Vector mean = llt.solve(rhs);
  const Vector z = rng.normal_vector(static_cast<int>(P.rows()));
  return mean + llt.matrixU().solve(z);
}

}  // namespace

GibbsSummary gibbs_reference_fit(const DynamicNetwork& data, const CovariateTensor& covariates,
                                 const StarModelSpec& spec, int iterations, int burn_in,
                                 std::uint64_t seed) {
  if (!spec.directed) throw ValidationError("gibbs_reference_fit supports directed models");
  if (spec.covariance_design != CovarianceDesign::kFull)
    throw ValidationError("gibbs_reference_fit expects the full covariance design");
  if (data.actor_count() > 30 || data.step_count() > 10)
    throw ValidationError("gibbs_reference_fit is an oracle, guarded to n <= 30 and T <= 10");
  if (iterations <= burn_in) throw ValidationError("iterations must exceed burn_in");

  // Reuse the fitter's data preparation (design matrices, basis inverses).
  FitOptions opts;
  const VbProblem prob = prepare_problem(data, covariates, spec, opts);
  const int n = prob.n;
  const int T = prob.T;
  const int p = prob.p1 + prob.p2;
  const PriorSet& pr = spec.priors;
  Rng rng(seed);

  // Coefficient precision is constant across sweeps.
  Matrix coef_precision = prob.prior_precision;
  for (const auto& X : prob.Xvec) coef_precision += X.transpose() * X;

  // State.
  Vector coeffs = Vector::Zero(p);
  std::vector<Vector> s1(T, Vector::Zero(n)), r1(T, Vector::Zero(n));
  std::vector<Vector> s2(T, Vector::Zero(n)), r2(T, Vector::Zero(n));
  std::vector<Matrix> R(T, Matrix::Zero(n, n));
  std::vector<Matrix> Astar(T, Matrix::Zero(n, n));
  double tau_s2 = pr.b_s0 / (pr.a_s0 + 1.0);
  double tau_r2 = pr.b_r0 / (pr.a_r0 + 1.0);
  double sigma2_R = pr.b_R0 / (pr.a_R0 + 1.0);
  Matrix omega = pr.B_omega0 / (pr.a_omega0 - 3.0);

  const Matrix off_ones = Matrix::Ones(n, n) - Matrix::Identity(n, n);
  const int kept = iterations - burn_in;
  Matrix coef_draws(kept, p);
  Matrix var_draws(kept, 3);  // tau_s2, tau_r2, sigma2_R
  Matrix omega_draws(kept, 4);

  for (int sweep = 0; sweep < iterations; ++sweep) {
    // Latent edge scores.
    for (int k = 0; k < T; ++k) {
      const Matrix F = unvec_minus_diag(prob.Xvec[static_cast<std::size_t>(k)] * coeffs, n);
      const Vector s = s1[static_cast<std::size_t>(k)] + s2[static_cast<std::size_t>(k)];
      const Vector r = r1[static_cast<std::size_t>(k)] + r2[static_cast<std::size_t>(k)];
      Matrix& A = Astar[static_cast<std::size_t>(k)];
      const Matrix& obs = prob.A[static_cast<std::size_t>(k)];
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          if (i == j) continue;
          const double loc = F(i, j) + s(i) + r(j) + R[static_cast<std::size_t>(k)](i, j);
          A(i, j) = rng.truncated_normal(loc, obs(i, j) > 0.5);
        }
    }

    // Coefficients.
    Vector rhs = Vector::Zero(p);
    for (int k = 0; k < T; ++k) {
      const Vector s = s1[static_cast<std::size_t>(k)] + s2[static_cast<std::size_t>(k)];
      const Vector r = r1[static_cast<std::size_t>(k)] + r2[static_cast<std::size_t>(k)];
      Matrix resid = Astar[static_cast<std::size_t>(k)] - s * Vector::Ones(n).transpose() -
                     Vector::Ones(n) * r.transpose() - R[static_cast<std::size_t>(k)];
      resid.diagonal().setZero();
      rhs += prob.Xvec[static_cast<std::size_t>(k)].transpose() * vec_minus_diag(resid);
    }
    coeffs = precision_normal(rng, coef_precision, rhs);

    // Actor effects, jointly per transition.
    const Matrix omega_prec = omega.inverse();
    for (int k = 0; k < T; ++k) {
      Matrix Q = Matrix::Zero(4 * n, 4 * n);
      const bool sender_slot[4] = {true, false, true, false};
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          if (sender_slot[a] == sender_slot[b])
            Q.block(a * n, b * n, n, n).diagonal().setConstant(static_cast<double>(n - 1));
          else
            Q.block(a * n, b * n, n, n) = off_ones;
        }
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) Q.block(a * n, b * n, n, n).diagonal().array() += omega_prec(a, b);
      Q.block(2 * n, 2 * n, n, n) += prob.Hs_inv[static_cast<std::size_t>(k)] / tau_s2;
      Q.block(3 * n, 3 * n, n, n) += prob.Hr_inv[static_cast<std::size_t>(k)] / tau_r2;

      const Matrix F = unvec_minus_diag(prob.Xvec[static_cast<std::size_t>(k)] * coeffs, n);
      Matrix resid = Astar[static_cast<std::size_t>(k)] - F - R[static_cast<std::size_t>(k)];
      resid.diagonal().setZero();
      Vector rhs_eff(4 * n);
      rhs_eff.segment(0, n) = resid.rowwise().sum();
      rhs_eff.segment(n, n) = resid.colwise().sum().transpose();
      rhs_eff.segment(2 * n, n) = rhs_eff.segment(0, n);
      rhs_eff.segment(3 * n, n) = rhs_eff.segment(n, n);
      const Vector eff = precision_normal(rng, Q, rhs_eff);
      s1[static_cast<std::size_t>(k)] = eff.segment(0, n);
      r1[static_cast<std::size_t>(k)] = eff.segment(n, n);
      s2[static_cast<std::size_t>(k)] = eff.segment(2 * n, n);
      r2[static_cast<std::size_t>(k)] = eff.segment(3 * n, n);
    }

    // Pair effects.
    const double v = 1.0 / (2.0 + 1.0 / sigma2_R);
    const double sd = std::sqrt(v);
    for (int k = 0; k < T; ++k) {
      const Matrix F = unvec_minus_diag(prob.Xvec[static_cast<std::size_t>(k)] * coeffs, n);
      const Vector s = s1[static_cast<std::size_t>(k)] + s2[static_cast<std::size_t>(k)];
      const Vector r = r1[static_cast<std::size_t>(k)] + r2[static_cast<std::size_t>(k)];
      Matrix resid = Astar[static_cast<std::size_t>(k)] - F - s * Vector::Ones(n).transpose() -
                     Vector::Ones(n) * r.transpose();
      resid.diagonal().setZero();
      Matrix& Rk = R[static_cast<std::size_t>(k)];
      for (int j = 0; j < n; ++j)
        for (int i = j + 1; i < n; ++i) {
          const double m = v * (resid(i, j) + resid(j, i));
          const double draw = m + sd * rng.normal();
          Rk(i, j) = draw;
          Rk(j, i) = draw;
        }
    }

    // Variance components.
    double qs = 0.0, qr = 0.0, qR = 0.0;
    Matrix scatter = Matrix::Zero(2, 2);
    for (int k = 0; k < T; ++k) {
      qs += s2[static_cast<std::size_t>(k)].dot(prob.Hs_inv[static_cast<std::size_t>(k)] *
                                                s2[static_cast<std::size_t>(k)]);
      qr += r2[static_cast<std::size_t>(k)].dot(prob.Hr_inv[static_cast<std::size_t>(k)] *
                                                r2[static_cast<std::size_t>(k)]);
      qR += 0.5 * R[static_cast<std::size_t>(k)].squaredNorm();
      for (int i = 0; i < n; ++i) {
        Eigen::Vector2d u(s1[static_cast<std::size_t>(k)](i), r1[static_cast<std::size_t>(k)](i));
        scatter += u * u.transpose();
      }
    }
    const double nT = static_cast<double>(n) * T;
    tau_s2 = rng.inverse_gamma(pr.a_s0 + 0.5 * nT, pr.b_s0 + 0.5 * qs);
    tau_r2 = rng.inverse_gamma(pr.a_r0 + 0.5 * nT, pr.b_r0 + 0.5 * qr);
    omega = rng.inverse_wishart_2x2(pr.a_omega0 + nT, pr.B_omega0 + scatter);
    sigma2_R = rng.inverse_gamma(pr.a_R0 + 0.25 * T * n * (n - 1), pr.b_R0 + 0.5 * qR);

    if (sweep >= burn_in) {
      const int row = sweep - burn_in;
      coef_draws.row(row) = coeffs.transpose();
      var_draws(row, 0) = tau_s2;
      var_draws(row, 1) = tau_r2;
      var_draws(row, 2) = sigma2_R;
      omega_draws(row, 0) = omega(0, 0);
      omega_draws(row, 1) = omega(0, 1);
      omega_draws(row, 2) = omega(1, 0);
      omega_draws(row, 3) = omega(1, 1);
    }
  }

  GibbsSummary out;
  out.iterations = iterations;
  out.burn_in = burn_in;
  out.beta_labels = prob.covariate_labels;
  out.theta_labels = prob.stat_labels;
  const Vector mean = coef_draws.colwise().mean().transpose();
  const Vector sd_all =
      ((coef_draws.rowwise() - mean.transpose()).colwise().squaredNorm() / (kept - 1.0)).cwiseSqrt().transpose();
  const Vector lo = quantile_columns(coef_draws, 0.025);
  const Vector hi = quantile_columns(coef_draws, 0.975);
  out.beta_mean = mean.head(prob.p1);
  out.theta_mean = mean.tail(prob.p2);
  out.beta_sd = sd_all.head(prob.p1);
  out.theta_sd = sd_all.tail(prob.p2);
  out.beta_lo = lo.head(prob.p1);
  out.beta_hi = hi.head(prob.p1);
  out.theta_lo = lo.tail(prob.p2);
  out.theta_hi = hi.tail(prob.p2);
  out.tau_s2_mean = var_draws.col(0).mean();
  out.tau_r2_mean = var_draws.col(1).mean();
  out.sigma2_R_mean = var_draws.col(2).mean();
  out.omega_mean = Matrix(2, 2);
  out.omega_mean << omega_draws.col(0).mean(), omega_draws.col(1).mean(), omega_draws.col(2).mean(),
      omega_draws.col(3).mean();
  return out;
}

}  // namespace star
