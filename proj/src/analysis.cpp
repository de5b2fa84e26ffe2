#include "bark/analysis.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace bark {

std::vector<LimitCurvePoint> laplace_limit_mc(const LimitConfig& config,
                                              Rng& rng) {
  if (!(config.lambda > 0.0))
    throw std::invalid_argument("lambda must be positive");
  if (config.n_trees < 1000)
    throw std::invalid_argument("n_trees must be at least 1000");
  if (config.dim < 1) throw std::invalid_argument("dim must be positive");
  if (config.probes.empty())
    throw std::invalid_argument("at least one probe pair required");
  for (const auto& [a, b] : config.probes) {
    if (static_cast<int>(a.size()) != config.dim ||
        static_cast<int>(b.size()) != config.dim)
      throw std::invalid_argument("probe arity mismatch");
    for (int j = 0; j < config.dim; ++j)
      if (a[j] < 0.0 || a[j] > 1.0 || b[j] < 0.0 || b[j] > 1.0)
        throw std::invalid_argument("probes must lie in the unit cube");
  }

  std::poisson_distribution<int> depth(config.lambda);
  std::vector<LimitCurvePoint> out;
  out.reserve(config.probes.size());
  for (const auto& [a, b] : config.probes) {
    double l1 = 0.0;
    for (int j = 0; j < config.dim; ++j) l1 += std::abs(a[j] - b[j]);

    long long together = 0;
    for (int t = 0; t < config.n_trees; ++t) {
      int d = depth(rng);
      bool separated = false;
      for (int k = 0; k < d && !separated; ++k) {
        int j = static_cast<int>(uniform_int(rng, 0, config.dim - 1));
        double u = uniform01(rng);
        separated = (a[j] <= u) != (b[j] <= u);
      }
      if (!separated) ++together;
    }
    LimitCurvePoint p;
    p.l1 = l1;
    p.empirical = static_cast<double>(together) / config.n_trees;
    p.theoretical = std::exp(-config.lambda * l1 / config.dim);
    p.std_error =
        std::sqrt(p.empirical * (1.0 - p.empirical) / config.n_trees);
    out.push_back(p);
  }
  return out;
}

double chopping_split_probability(double x, int d) {
  if (!(x > 0.0 && x < 1.0))
    throw std::invalid_argument("x must lie in (0,1)");
  if (d < 1) throw std::invalid_argument("d must be at least 1");
  if (d == 1) return x;
  // x (-log x)^(d-1) / (d-1)!, evaluated in log space
  double log_neg_log_x = std::log(-std::log(x));
  return std::exp(std::log(x) + (d - 1) * log_neg_log_x - std::lgamma(d));
}

std::vector<double> chopping_simulation(double x, int max_d,
                                        std::int64_t n_runs, Rng& rng) {
  if (!(x > 0.0 && x < 1.0))
    throw std::invalid_argument("x must lie in (0,1)");
  if (max_d < 1 || n_runs < 1)
    throw std::invalid_argument("max_d and n_runs must be positive");
  std::vector<std::int64_t> counts(max_d, 0);
  for (std::int64_t r = 0; r < n_runs; ++r) {
    double b = 1.0;
    for (int d = 1;; ++d) {
      double u = uniform_real(rng, 0.0, b);
      if (u <= x) {
        if (d <= max_d) ++counts[d - 1];
        break;
      }
      b = u;
    }
  }
  std::vector<double> freq(max_d);
  for (int d = 0; d < max_d; ++d)
    freq[d] = static_cast<double>(counts[d]) / static_cast<double>(n_runs);
  return freq;
}

double depth_weighted_separation(double x, double alpha, double beta,
                                 int max_depth, SeriesIndex index) {
  if (!(x > 0.0 && x < 1.0))
    throw std::invalid_argument("x must lie in (0,1)");
  if (alpha < 0.0 || alpha > 1.0 || beta < 0.0 || max_depth < 1)
    throw std::invalid_argument("bad series parameters");
  if (alpha == 0.0) return 0.0;

  double total = 0.0;
  double per_level_product = 1.0;
  for (int d = 1; d <= max_depth; ++d) {
    double pd = chopping_split_probability(x, d);
    double damp;
    if (index == SeriesIndex::PerLevel) {
      per_level_product *= alpha * std::pow(1.0 + d, -beta);
      damp = per_level_product;
    } else {
      damp = std::pow(alpha * std::pow(1.0 + d, -beta), d);
    }
    total += pd * damp;
  }
  return total;
}

std::vector<KernelCurveRow> kernel_comparison_curve(double alpha, double beta,
                                                    int n_grid) {
  if (n_grid < 1) throw std::invalid_argument("n_grid must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0,1)");
  double lambda = -std::log(1.0 - alpha);
  std::vector<KernelCurveRow> rows;
  rows.reserve(n_grid);
  for (int i = 1; i <= n_grid; ++i) {
    KernelCurveRow row;
    row.x = static_cast<double>(i) / (n_grid + 1);
    row.k_chopping = 1.0 - depth_weighted_separation(row.x, alpha, beta);
    row.k_laplace = std::exp(-lambda * row.x);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace bark
