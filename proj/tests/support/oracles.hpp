#pragma once

// Independent reference implementations used only by tests. Everything here
// is deliberately naive: explicit design matrices, dense Kronecker products,
// scalar loops, and long-double quadrature, so that agreement with the
// library is evidence rather than tautology.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "star/model.hpp"
#include "star/netstats.hpp"
#include "star/network.hpp"
#include "star/vb.hpp"

namespace star::oracle {

// ---------------------------------------------------------------------------
// Quadrature oracle for truncated-normal means.

namespace detail {

inline long double adaptive_simpson(const std::function<long double(long double)>& f, long double a,
                                    long double b, long double fa, long double fm, long double fb,
                                    long double tol, int depth) {
  const long double m = 0.5L * (a + b);
  const long double lm = 0.5L * (a + m);
  const long double rm = 0.5L * (m + b);
  const long double flm = f(lm);
  const long double frm = f(rm);
  const long double whole = (b - a) / 6.0L * (fa + 4.0L * fm + fb);
  const long double left = (m - a) / 6.0L * (fa + 4.0L * flm + fm);
  const long double right = (b - m) / 6.0L * (fm + 4.0L * frm + fb);
  const long double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0L * tol) return left + right + delta / 15.0L;
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5L * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5L * tol, depth - 1);
}

inline long double integrate(const std::function<long double(long double)>& f, long double a,
                             long double b, long double tol) {
  const long double fa = f(a);
  const long double fb = f(b);
  const long double fm = f(0.5L * (a + b));
  return adaptive_simpson(f, a, b, fa, fm, fb, tol, 48);
}

}  // namespace detail

/// E[X | X > 0] (or X < 0) for X ~ N(loc, 1), by adaptive Simpson quadrature
/// in long double with the peak exponent factored out.
inline double truncnorm_mean_quadrature(double loc, bool positive_side) {
  const long double mu = loc;
  long double lo, hi, peak;
  if (positive_side) {
    lo = 0.0L;
    hi = std::max<long double>(mu, 0.0L) + 15.0L;
    peak = std::max<long double>(mu, 0.0L);
  } else {
    lo = std::min<long double>(mu, 0.0L) - 15.0L;
    hi = 0.0L;
    peak = std::min<long double>(mu, 0.0L);
  }
  const long double C = -0.5L * (peak - mu) * (peak - mu);
  auto weight = [&](long double x) { return std::exp(-0.5L * (x - mu) * (x - mu) - C); };
  const long double den = detail::integrate(weight, lo, hi, 1e-18L);
  const long double num =
      detail::integrate([&](long double x) { return x * weight(x); }, lo, hi, 1e-18L);
  return static_cast<double>(num / den);
}

// ---------------------------------------------------------------------------
// Brute-force lag statistics (scalar triple loops, straight from the
// summation definitions).

inline Matrix brute_stat_directed(const std::string& name, const Matrix& A_in) {
  const int n = static_cast<int>(A_in.rows());
  Matrix A = A_in;
  A.diagonal().setZero();
  Matrix S = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0;
      if (name == "out_degree")
        for (int k = 0; k < n; ++k) v += A(i, k);
      else if (name == "in_degree")
        for (int k = 0; k < n; ++k) v += A(k, j);
      else if (name == "stability")
        v = A(i, j);
      else if (name == "reciprocity")
        v = A(j, i);
      else if (name == "transitivity1")
        for (int k = 0; k < n; ++k) v += A(i, k) * A(k, j);
      else if (name == "transitivity2")
        for (int k = 0; k < n; ++k) v += A(i, k) * A(j, k);
      else if (name == "transitivity3")
        for (int k = 0; k < n; ++k) v += A(k, i) * A(k, j);
      else if (name == "cycle")
        for (int k = 0; k < n; ++k) v += A(k, i) * A(j, k);
      S(i, j) = v;
    }
  return S;
}

inline Matrix brute_stat_undirected(const std::string& name, const Matrix& A_in) {
  const int n = static_cast<int>(A_in.rows());
  Matrix A = A_in;
  A.diagonal().setZero();
  Matrix S = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0;
      if (name == "degree")
        for (int k = 0; k < n; ++k) v += A(i, k) + A(j, k);
      else if (name == "stability")
        v = A(i, j);
      else if (name == "triangle")
        for (int k = 0; k < n; ++k) v += A(i, k) * A(j, k);
      S(i, j) = v;
    }
  return S;
}

// ---------------------------------------------------------------------------
// Scalar role-based covariance entry for dyads (i,j) and (k,l).

inline double covariance_entry(const ModelParams& params, const Matrix& sigma_s, const Matrix& sigma_r,
                               const Matrix& sigma_sr, int i, int j, int k, int l) {
  double v = sigma_s(i, k) + sigma_r(j, l) + sigma_sr(i, l) + sigma_sr(k, j);
  if ((i == k && j == l) || (i == l && j == k)) v += params.sigma2_R;
  if (i == k && j == l) v += ModelParams::sigma2_eps;
  return v;
}

// ---------------------------------------------------------------------------
// Dense Kronecker product.

inline Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

// ---------------------------------------------------------------------------
// Design-matrix route for the coordinate updates. Everything below goes
// through explicit Z matrices and dense inverses.

/// Lower-triangle pair vector of a symmetric matrix (column-major, i > j).
inline Vector lower_pairs(const Matrix& M) { return vec_lower_pairs(M); }

/// Effect-to-dyad design with the identity/similarity blocks repeated:
/// [Z_s Z_r Z_s Z_r] for the full design, [Z_s Z_r] for identity-only.
inline Matrix stacked_effect_design(int n, bool full) {
  const DyadDesign d = build_Z_matrices(n);
  const int nd = n * (n - 1);
  Matrix Z(nd, full ? 4 * n : 2 * n);
  Z.block(0, 0, nd, n) = d.Z_s;
  Z.block(0, n, nd, n) = d.Z_r;
  if (full) {
    Z.block(0, 2 * n, nd, n) = d.Z_s;
    Z.block(0, 3 * n, nd, n) = d.Z_r;
  }
  return Z;
}

/// Latent locations via the design matrices:
/// X mu + Z_s s + Z_r r + Z_rec (pair effects).
inline Matrix latent_locations(const VbProblem& prob, const VariationalState& st, int k) {
  const int n = prob.n;
  const DyadDesign d = build_Z_matrices(n);
  Vector v = prob.Xvec[static_cast<std::size_t>(k)] * st.mu_m;
  if (prob.spec.covariance_design != CovarianceDesign::kNone) {
    Vector s = st.mu_s1[static_cast<std::size_t>(k)];
    Vector r = st.mu_r1[static_cast<std::size_t>(k)];
    if (st.mu_s2[static_cast<std::size_t>(k)].size()) s += st.mu_s2[static_cast<std::size_t>(k)];
    if (st.mu_r2[static_cast<std::size_t>(k)].size()) r += st.mu_r2[static_cast<std::size_t>(k)];
    v += d.Z_s * s + d.Z_r * r + d.Z_rec * lower_pairs(st.M_R[static_cast<std::size_t>(k)]);
  }
  return unvec_minus_diag(v, n);
}

/// Coefficient update via dense inverse and design matrices.
inline void coefficient_update(const VbProblem& prob, const VariationalState& st, Vector& mu,
                               Matrix& sigma) {
  const int p = prob.p1 + prob.p2;
  Matrix precision = prob.prior_precision;
  for (const auto& X : prob.Xvec) precision += X.transpose() * X;
  sigma = precision.inverse();
  Vector rhs = Vector::Zero(p);
  const DyadDesign d = build_Z_matrices(prob.n);
  for (int k = 0; k < prob.T; ++k) {
    Vector v = vec_minus_diag(st.E_latent[static_cast<std::size_t>(k)]);
    if (prob.spec.covariance_design != CovarianceDesign::kNone) {
      Vector s = st.mu_s1[static_cast<std::size_t>(k)];
      Vector r = st.mu_r1[static_cast<std::size_t>(k)];
      if (st.mu_s2[static_cast<std::size_t>(k)].size()) s += st.mu_s2[static_cast<std::size_t>(k)];
      if (st.mu_r2[static_cast<std::size_t>(k)].size()) r += st.mu_r2[static_cast<std::size_t>(k)];
      v -= d.Z_s * s + d.Z_r * r + d.Z_rec * lower_pairs(st.M_R[static_cast<std::size_t>(k)]);
    }
    rhs += prob.Xvec[static_cast<std::size_t>(k)].transpose() * v;
  }
  mu = sigma * rhs;
}

/// Actor-effect update for one transition via Z'Z + dense Kronecker priors.
inline void actor_effect_update(const VbProblem& prob, const VariationalState& st, int k, Vector& mean,
                                Matrix& cov) {
  const int n = prob.n;
  const bool full = prob.spec.covariance_design == CovarianceDesign::kFull;
  const Matrix Z = stacked_effect_design(n, full);
  Matrix Q = Z.transpose() * Z;
  const Matrix omega_prior = kron(st.a_omega * st.B_omega.inverse(), Matrix::Identity(n, n));
  Q.topLeftCorner(2 * n, 2 * n) += omega_prior;
  if (full) {
    Q.block(2 * n, 2 * n, n, n) += (st.a_s / st.b_s) * prob.Hs_inv[static_cast<std::size_t>(k)];
    Q.block(3 * n, 3 * n, n, n) += (st.a_r / st.b_r) * prob.Hr_inv[static_cast<std::size_t>(k)];
  }
  const DyadDesign d = build_Z_matrices(n);
  const Vector resid = vec_minus_diag(st.E_latent[static_cast<std::size_t>(k)]) -
                       prob.Xvec[static_cast<std::size_t>(k)] * st.mu_m -
                       d.Z_rec * lower_pairs(st.M_R[static_cast<std::size_t>(k)]);
  cov = Q.inverse();
  mean = cov * (Z.transpose() * resid);
}

/// Undirected actor-effect update via the pair design matrix.
inline void actor_effect_update_undirected(const VbProblem& prob, const VariationalState& st, int k,
                                           Vector& mean, Matrix& cov) {
  const int n = prob.n;
  const int pairs = n * (n - 1) / 2;
  Matrix Z = Matrix::Zero(pairs, n);
  for (int j = 0; j < n; ++j)
    for (int i = j + 1; i < n; ++i) {
      Z(pair_index(i, j, n), i) = 1.0;
      Z(pair_index(i, j, n), j) = 1.0;
    }
  Matrix Q = Z.transpose() * Z + (st.a_s / st.b_s) * prob.Hs_inv[static_cast<std::size_t>(k)];
  const Vector resid = vec_lower_pairs(st.E_latent[static_cast<std::size_t>(k)]) -
                       prob.Xvec[static_cast<std::size_t>(k)] * st.mu_m;
  cov = Q.inverse();
  mean = cov * (Z.transpose() * resid);
}

/// Pair-effect update by scalar loops.
inline void pair_effect_update(const VbProblem& prob, const VariationalState& st, int k, Matrix& M,
                               double& var) {
  const int n = prob.n;
  const double ratio = st.b_R / st.a_R;
  var = ratio / (1.0 + 2.0 * ratio);
  const Matrix F = unvec_minus_diag(prob.Xvec[static_cast<std::size_t>(k)] * st.mu_m, n);
  Vector s = st.mu_s1[static_cast<std::size_t>(k)];
  Vector r = st.mu_r1[static_cast<std::size_t>(k)];
  if (st.mu_s2[static_cast<std::size_t>(k)].size()) s += st.mu_s2[static_cast<std::size_t>(k)];
  if (st.mu_r2[static_cast<std::size_t>(k)].size()) r += st.mu_r2[static_cast<std::size_t>(k)];
  M = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = j + 1; i < n; ++i) {
      const double aij = st.E_latent[static_cast<std::size_t>(k)](i, j) - F(i, j) - s(i) - r(j);
      const double aji = st.E_latent[static_cast<std::size_t>(k)](j, i) - F(j, i) - s(j) - r(i);
      M(i, j) = var * (aij + aji);
      M(j, i) = M(i, j);
    }
}

/// Variance-component update by scalar loops over explicit blocks.
inline void variance_update(const VbProblem& prob, const VariationalState& st, double& a_s, double& b_s,
                            double& a_r, double& b_r, double& a_omega, Matrix& B_omega) {
  const int n = prob.n;
  const PriorSet& pr = prob.spec.priors;
  a_s = pr.a_s0 + 0.5 * n * prob.T;
  a_r = pr.a_r0 + 0.5 * n * prob.T;
  a_omega = pr.a_omega0 + static_cast<double>(n) * prob.T;
  b_s = pr.b_s0;
  b_r = pr.b_r0;
  B_omega = pr.B_omega0;
  const bool full = prob.spec.covariance_design == CovarianceDesign::kFull;
  for (int k = 0; k < prob.T; ++k) {
    const Matrix& S = st.sigma_sr[static_cast<std::size_t>(k)];
    if (full) {
      const Matrix& Hs = prob.Hs_inv[static_cast<std::size_t>(k)];
      const Matrix& Hr = prob.Hr_inv[static_cast<std::size_t>(k)];
      const Vector& s2 = st.mu_s2[static_cast<std::size_t>(k)];
      const Vector& r2 = st.mu_r2[static_cast<std::size_t>(k)];
      double trace_s = 0, quad_s = 0, trace_r = 0, quad_r = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          trace_s += S(2 * n + i, 2 * n + j) * Hs(j, i);
          trace_r += S(3 * n + i, 3 * n + j) * Hr(j, i);
          quad_s += s2(i) * Hs(i, j) * s2(j);
          quad_r += r2(i) * Hr(i, j) * r2(j);
        }
      b_s += 0.5 * (trace_s + quad_s);
      b_r += 0.5 * (trace_r + quad_r);
    }
    for (int i = 0; i < n; ++i) {
      Matrix piece(2, 2);
      piece << S(i, i), S(i, n + i), S(n + i, i), S(n + i, n + i);
      Eigen::Vector2d u(st.mu_s1[static_cast<std::size_t>(k)](i), st.mu_r1[static_cast<std::size_t>(k)](i));
      B_omega += piece + u * u.transpose();
    }
  }
}

/// Undirected variance update by scalar loops.
inline void variance_update_undirected(const VbProblem& prob, const VariationalState& st, double& a_s,
                                       double& b_s) {
  const int n = prob.n;
  a_s = prob.spec.priors.a_s0 + 0.5 * n * prob.T;
  b_s = prob.spec.priors.b_s0;
  for (int k = 0; k < prob.T; ++k) {
    const Matrix& H = prob.Hs_inv[static_cast<std::size_t>(k)];
    const Matrix& S = st.sigma_s[static_cast<std::size_t>(k)];
    const Vector& mu = st.mu_s[static_cast<std::size_t>(k)];
    double trace = 0, quad = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        trace += S(i, j) * H(j, i);
        quad += mu(i) * H(i, j) * mu(j);
      }
    b_s += 0.5 * (trace + quad);
  }
}

/// Pair-variance update by scalar loops.
inline void pair_variance_update(const VbProblem& prob, const VariationalState& st, double& a_R,
                                 double& b_R) {
  const int n = prob.n;
  a_R = prob.spec.priors.a_R0 + 0.25 * prob.T * n * (n - 1);
  b_R = prob.spec.priors.b_R0;
  for (int k = 0; k < prob.T; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = j + 1; i < n; ++i)
        b_R += 0.5 * (st.sigma2_R_tilde +
                      st.M_R[static_cast<std::size_t>(k)](i, j) * st.M_R[static_cast<std::size_t>(k)](i, j));
}

// ---------------------------------------------------------------------------
// Random problem/state generators for the update-fidelity checks.

struct RandomProblem {
  DynamicNetwork network;
  CovariateTensor covariates;
  StarModelSpec spec;
};

inline RandomProblem random_problem(std::mt19937_64& eng, int n, int T, bool directed,
                                    CovarianceDesign design, int p1 = 2) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> norm(0.0, 1.0);
  std::vector<Matrix> snaps;
  for (int t = 0; t <= T; ++t) {
    Matrix A = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = directed ? 0 : j + 1; i < n; ++i) {
        if (i == j) continue;
        const double e = unif(eng) < 0.35 ? 1.0 : 0.0;
        A(i, j) = e;
        if (!directed) A(j, i) = e;
      }
    snaps.push_back(std::move(A));
  }
  RandomProblem rp;
  rp.network = DynamicNetwork::from_snapshots(std::move(snaps), directed);
  for (int l = 0; l < p1; ++l) {
    std::vector<Matrix> steps;
    for (int t = 0; t < T; ++t) {
      Matrix X(n, n);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) X(i, j) = norm(eng);
      if (!directed) X = ((X + X.transpose()) / 2.0).eval();
      steps.push_back(std::move(X));
    }
    rp.covariates.slices.push_back(std::move(steps));
    rp.covariates.labels.push_back("x" + std::to_string(l + 1));
  }
  rp.spec = StarModelSpec::defaults(directed);
  rp.spec.covariance_design = design;
  return rp;
}

inline Matrix random_spd(std::mt19937_64& eng, int n, double ridge = 0.5) {
  std::normal_distribution<double> norm(0.0, 1.0);
  Matrix A(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) A(i, j) = norm(eng);
  return A * A.transpose() / n + ridge * Matrix::Identity(n, n);
}

/// Fills a state with random (but internally consistent) values so a single
/// coordinate update can be checked in isolation.
inline VariationalState random_state(std::mt19937_64& eng, const VbProblem& prob) {
  std::normal_distribution<double> norm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.5, 3.0);
  VariationalState st = initial_state(prob);
  for (Eigen::Index i = 0; i < st.mu_m.size(); ++i) st.mu_m(i) = 0.3 * norm(eng);
  st.a_s = unif(eng) + 1.0;
  st.b_s = unif(eng);
  st.a_r = unif(eng) + 1.0;
  st.b_r = unif(eng);
  st.a_omega = unif(eng) + 3.0;
  st.B_omega = random_spd(eng, 2);
  st.a_R = unif(eng) + 1.0;
  st.b_R = unif(eng);
  st.sigma2_R_tilde = 0.25 * unif(eng);
  const int n = prob.n;
  const bool effects = prob.spec.covariance_design != CovarianceDesign::kNone;
  const bool full = prob.spec.covariance_design == CovarianceDesign::kFull;
  for (int k = 0; k < prob.T; ++k) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (i == j) continue;
        st.M_A[static_cast<std::size_t>(k)](i, j) = norm(eng);
        st.E_latent[static_cast<std::size_t>(k)](i, j) = norm(eng);
      }
    if (!prob.spec.directed) {
      st.M_A[static_cast<std::size_t>(k)] = ((st.M_A[static_cast<std::size_t>(k)] +
                                              st.M_A[static_cast<std::size_t>(k)].transpose()) /
                                             2.0)
                                                .eval();
      st.E_latent[static_cast<std::size_t>(k)] = ((st.E_latent[static_cast<std::size_t>(k)] +
                                                   st.E_latent[static_cast<std::size_t>(k)].transpose()) /
                                                  2.0)
                                                     .eval();
    }
    if (effects) {
      if (prob.spec.directed) {
        for (int i = 0; i < n; ++i) {
          st.mu_s1[static_cast<std::size_t>(k)](i) = 0.3 * norm(eng);
          st.mu_r1[static_cast<std::size_t>(k)](i) = 0.3 * norm(eng);
          if (full) {
            st.mu_s2[static_cast<std::size_t>(k)](i) = 0.3 * norm(eng);
            st.mu_r2[static_cast<std::size_t>(k)](i) = 0.3 * norm(eng);
          }
        }
        st.sigma_sr[static_cast<std::size_t>(k)] = random_spd(eng, prob.effect_dim(), 0.1);
        for (int j = 0; j < n; ++j)
          for (int i = j + 1; i < n; ++i) {
            const double v = 0.2 * norm(eng);
            st.M_R[static_cast<std::size_t>(k)](i, j) = v;
            st.M_R[static_cast<std::size_t>(k)](j, i) = v;
          }
      } else {
        for (int i = 0; i < n; ++i) st.mu_s[static_cast<std::size_t>(k)](i) = 0.3 * norm(eng);
        st.sigma_s[static_cast<std::size_t>(k)] = random_spd(eng, n, 0.1);
      }
    }
  }
  return st;
}

/// Random parameters that satisfy the covariance validity constraints.
inline ModelParams random_valid_params(std::mt19937_64& eng, int p1, int p2) {
  std::normal_distribution<double> norm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 0.5);
  ModelParams params;
  params.beta = Vector(p1);
  for (int i = 0; i < p1; ++i) params.beta(i) = norm(eng);
  params.theta = Vector(p2);
  for (int i = 0; i < p2; ++i) params.theta(i) = 0.2 * norm(eng);
  params.omega = random_spd(eng, 2, 0.05) * 0.3;
  params.tau_s2 = unif(eng);
  params.tau_r2 = unif(eng);
  params.sigma2_R = unif(eng);
  return params;
}

}  // namespace star::oracle
