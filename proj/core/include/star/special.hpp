#pragma once

// Scalar numerics shared by the fitter, the samplers, and the diagnostics.

namespace star {

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal CDF.
double normal_cdf(double x);

/// Hazard (inverse Mills) ratio phi(a) / (1 - Phi(a)). Stable for all a;
/// switches to a continued fraction in the far upper tail.
double inverse_mills(double a);

/// Mean of a unit-variance normal with location loc truncated to (0, inf)
/// when positive_side, else to (-inf, 0).
double truncnorm_mean(double loc, bool positive_side);

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double regularized_gamma_p(double a, double x);

}  // namespace star
