#include "star/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "star/errors.hpp"
#include "star/special.hpp"

namespace star {

std::string to_string(CovarianceDesign design) {
  switch (design) {
    case CovarianceDesign::kFull: return "full";
    case CovarianceDesign::kIdentityOnly: return "identity_only";
    case CovarianceDesign::kNone: return "none";
  }
  return "full";
}

CovarianceDesign covariance_design_from_string(const std::string& s) {
  if (s == "full") return CovarianceDesign::kFull;
  if (s == "identity_only") return CovarianceDesign::kIdentityOnly;
  if (s == "none") return CovarianceDesign::kNone;
  throw ValidationError("unknown covariance_design: " + s);
}

void PriorSet::validate() const {
  if (sigma2_beta <= 0 || sigma2_theta <= 0) throw ValidationError("coefficient prior variances must be positive");
  if (a_s0 <= 0 || b_s0 <= 0 || a_r0 <= 0 || b_r0 <= 0 || a_R0 <= 0 || b_R0 <= 0)
    throw ValidationError("inverse-gamma prior shapes and scales must be positive");
  if (a_omega0 <= 3.0) throw ValidationError("a_omega0 must exceed 3 so the prior mean exists");
  if (B_omega0.rows() != 2 || B_omega0.cols() != 2) throw ValidationError("B_omega0 must be 2x2");
  if (std::abs(B_omega0(0, 1) - B_omega0(1, 0)) > 1e-12) throw ValidationError("B_omega0 must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(B_omega0);
  if (eig.eigenvalues().minCoeff() <= 0.0) throw ValidationError("B_omega0 must be positive definite");
}

int StarModelSpec::sender_basis_count() const {
  switch (covariance_design) {
    case CovarianceDesign::kFull: return 2;
    case CovarianceDesign::kIdentityOnly: return 1;
    case CovarianceDesign::kNone: return 0;
  }
  return 0;
}

int StarModelSpec::receiver_basis_count() const { return sender_basis_count(); }

int StarModelSpec::cross_basis_count() const { return covariance_design == CovarianceDesign::kNone ? 0 : 1; }

void StarModelSpec::validate() const {
  priors.validate();
  if (lag_depth < 1) throw ValidationError("lag_depth must be >= 1");
  const auto& known = directed ? directed_stat_names() : undirected_stat_names();
  for (const auto& s : stats) {
    bool ok = false;
    for (const auto& k : known) ok = ok || (k == s);
    if (!ok) throw ValidationError("unknown stat '" + s + "' for " + (directed ? "directed" : "undirected") +
                                   " networks");
  }
  if (cross_basis_count() > std::min(sender_basis_count(), receiver_basis_count()))
    throw ValidationError("cross basis count exceeds min(sender, receiver) basis count");
  if (!directed && covariance_design == CovarianceDesign::kIdentityOnly)
    throw ValidationError("identity_only design applies to directed networks");
}

StarModelSpec StarModelSpec::defaults(bool directed) {
  StarModelSpec spec;
  spec.directed = directed;
  spec.stats = directed ? directed_stat_names() : undirected_stat_names();
  return spec;
}

PsdReport validate_psd(const ModelParams& params, const CovarianceBases& bases) {
  constexpr double tol = -1e-8;
  PsdReport report;
  report.min_eigenvalue = std::numeric_limits<double>::infinity();

  auto check = [&](const Matrix& M, const std::string& name) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()));
    const double lmin = eig.eigenvalues().minCoeff();
    if (lmin < report.min_eigenvalue) report.min_eigenvalue = lmin;
    if (lmin < tol) {
      report.valid = false;
      if (!report.detail.empty()) report.detail += "; ";
      report.detail += name + " has eigenvalue " + std::to_string(lmin);
    }
  };

  check(params.omega, "omega");
  if (params.tau_s2 < 0 || params.tau_r2 < 0 || params.sigma2_R < 0) {
    report.valid = false;
    report.detail += std::string(report.detail.empty() ? "" : "; ") + "negative variance component";
  }

  const int K_s = static_cast<int>(bases.sender.size());
  const int K_r = static_cast<int>(bases.receiver.size());
  const int K_sr = static_cast<int>(bases.cross.size());
  const Vector ws = sender_weights(params, K_s);
  const Vector wr = receiver_weights(params, K_r);
  const Vector wsr = cross_weights(params, K_sr);
  for (int k = 0; k < K_sr; ++k) {
    const auto n = bases.sender[static_cast<std::size_t>(k)].rows();
    Matrix block(2 * n, 2 * n);
    block.topLeftCorner(n, n) = ws(k) * bases.sender[static_cast<std::size_t>(k)];
    block.topRightCorner(n, n) = wsr(k) * bases.cross[static_cast<std::size_t>(k)];
    block.bottomLeftCorner(n, n) = wsr(k) * bases.cross[static_cast<std::size_t>(k)].transpose();
    block.bottomRightCorner(n, n) = wr(k) * bases.receiver[static_cast<std::size_t>(k)];
    check(block, "sender/receiver block " + std::to_string(k + 1));
  }
  return report;
}

Vector sender_weights(const ModelParams& params, int K_s) {
  Vector w(K_s);
  if (K_s >= 1) w(0) = params.tau_s1();
  if (K_s >= 2) w(1) = params.tau_s2;
  if (K_s > 2) throw ValidationError("sender_weights: at most 2 sender bases supported");
  return w;
}

Vector receiver_weights(const ModelParams& params, int K_r) {
  Vector w(K_r);
  if (K_r >= 1) w(0) = params.tau_r1();
  if (K_r >= 2) w(1) = params.tau_r2;
  if (K_r > 2) throw ValidationError("receiver_weights: at most 2 receiver bases supported");
  return w;
}

Vector cross_weights(const ModelParams& params, int K_sr) {
  Vector w(K_sr);
  if (K_sr >= 1) w(0) = params.tau_sr1();
  if (K_sr > 1) throw ValidationError("cross_weights: at most 1 cross basis supported");
  return w;
}

Matrix assemble_dyad_covariance(const ModelParams& params, const CovarianceBases& bases, int n) {
  if (n > 64) throw ValidationError("assemble_dyad_covariance: n > 64 exceeds the test-scale guard");
  if (n < 2) throw ValidationError("assemble_dyad_covariance: need n >= 2");

  auto weighted_sum = [n](const Vector& w, const std::vector<Matrix>& mats) {
    Matrix out = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < w.size(); ++k) out += w(k) * mats[static_cast<std::size_t>(k)];
    return out;
  };
  const Matrix sigma_s = weighted_sum(sender_weights(params, static_cast<int>(bases.sender.size())), bases.sender);
  const Matrix sigma_r =
      weighted_sum(receiver_weights(params, static_cast<int>(bases.receiver.size())), bases.receiver);
  const Matrix sigma_sr = weighted_sum(cross_weights(params, static_cast<int>(bases.cross.size())), bases.cross);

  // vec position of dyad (i,j) is j*n + i; fill block (j,l) of the
  // Kronecker-structured sum, then add the reciprocal-pair and noise terms.
  const Vector ones = Vector::Ones(n);
  Matrix cov(n * n, n * n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l)
      cov.block(j * n, l * n, n, n) = sigma_s + sigma_r(j, l) * Matrix::Ones(n, n) +
                                      sigma_sr.col(l) * ones.transpose() + ones * sigma_sr.col(j).transpose();
  cov += params.sigma2_R * build_reciprocal_swap(n);
  cov += (ModelParams::sigma2_eps + params.sigma2_R) * Matrix::Identity(n * n, n * n);
  return cov;
}

double marginal_edge_probability(double m, double var_sr, double var_E) {
  if (var_E <= 0) throw ValidationError("marginal_edge_probability: var_E must be positive");
  if (var_sr < 0) throw ValidationError("marginal_edge_probability: var_sr must be nonnegative");
  return normal_cdf(m / std::sqrt(var_E + var_sr));
}

double icc_reciprocity(double sigma2_R) {
  if (sigma2_R < 0) throw ValidationError("icc_reciprocity: sigma2_R must be nonnegative");
  return sigma2_R / (sigma2_R + 1.0);
}

Vector variance_ratio_vector(const ModelParams& params) {
  Vector v(6);
  v << params.tau_s1(), params.tau_s2, params.tau_r1(), params.tau_r2, params.sigma2_R, ModelParams::sigma2_eps;
  const double total = v.sum();
  if (total <= 0) throw ValidationError("variance_ratio_vector: total variance must be positive");
  return v / total;
}

}  // namespace star
