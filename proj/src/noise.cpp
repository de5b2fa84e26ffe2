#include "bark/noise.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <stdexcept>

namespace bark {

double inverse_gamma_cdf(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_q(a, b / x);
}

double inverse_gamma_log_pdf(double a, double b, double x) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
}

double inverse_gamma_quantile(double a, double b, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile needs p in (0,1)");
  // Pr(X <= x) = Q(a, b/x) = p  =>  x = b / Q^-1(a, p)
  return b / boost::math::gamma_q_inv(a, p);
}

double sample_inverse_gamma(double a, double b, Rng& rng) {
  // X = b / G with G ~ Gamma(a, scale 1)
  std::gamma_distribution<double> g(a, 1.0);
  double draw;
  do {
    draw = g(rng);
  } while (draw <= 0.0);
  return b / draw;
}

double solve_noise_scale(double nu, double q) {
  if (!(nu > 0.0)) throw std::invalid_argument("solve_noise_scale needs nu > 0");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("solve_noise_scale needs q in (0,1)");
  const double a = 0.5 * nu;
  auto cdf_at_one = [&](double t) { return inverse_gamma_cdf(a, 0.5 * nu * t, 1.0); };

  // Pr(sigma^2 < 1) decreases in t; establish a bracket first.
  double lo = 1e-12, hi = 1.0;
  while (cdf_at_one(hi) > q) {
    hi *= 2.0;
    if (hi > 1e12) throw std::runtime_error("solve_noise_scale: bracket failure");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double p = cdf_at_one(mid);
    if (std::abs(p - q) < 1e-10) return mid;
    if (p > q)
      lo = mid;
    else
      hi = mid;
  }
  throw std::runtime_error("solve_noise_scale: no convergence after 200 iterations");
}

NoisePrior make_noise_prior(double nu, double q) {
  NoisePrior p;
  p.nu = nu;
  p.q = q;
  p.t = solve_noise_scale(nu, q);
  return p;
}

double NoisePrior::log_pdf(double x) const {
  return inverse_gamma_log_pdf(shape(), rate(), x);
}

}  // namespace bark
