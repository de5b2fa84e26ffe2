#pragma once

#include "bark/rng.hpp"

namespace bark {

// Observation-noise prior sigma_y^2 ~ InverseGamma(nu/2, nu*t/2), with t
// solved so that Pr(sigma_y^2 < 1) = q (outputs are standardized, so the
// empirical variance the quantile is anchored to is 1).
struct NoisePrior {
  double nu = 3.0;
  double q = 0.9;
  double t = 0.0;

  double shape() const { return 0.5 * nu; }
  double rate() const { return 0.5 * nu * t; }
  double mean() const { return nu * t / (nu - 2.0); }  // finite for nu > 2
  double log_pdf(double x) const;
};

// CDF of InverseGamma(shape a, rate b) via the regularized upper incomplete
// gamma: Pr(X <= x) = Q(a, b / x).
double inverse_gamma_cdf(double a, double b, double x);
double inverse_gamma_log_pdf(double a, double b, double x);
double inverse_gamma_quantile(double a, double b, double p);
double sample_inverse_gamma(double a, double b, Rng& rng);

// Bisection on t until |Pr(sigma^2 < 1) - q| < 1e-10; throws after 200
// iterations without convergence.
double solve_noise_scale(double nu, double q);
NoisePrior make_noise_prior(double nu, double q);

}  // namespace bark
