#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bark/feature_space.hpp"
#include "bark/rng.hpp"

namespace bark {

// Idealized forest generator used to verify the Laplace-kernel limit: along
// each root-to-leaf path the depth is Poisson(lambda), split features are
// uniform over dimensions, and split locations are uniform on [0,1]
// regardless of the current cell.
struct LimitConfig {
  double lambda = 1.0;
  int dim = 1;
  int n_trees = 20000;
  std::vector<std::pair<Point, Point>> probes;  // pairs in [0,1]^dim
};

struct LimitCurvePoint {
  double l1 = 0.0;          // |x - x'|_1
  double empirical = 0.0;   // MC fraction of trees keeping the pair together
  double theoretical = 0.0; // exp(-lambda * l1 / dim)
  double std_error = 0.0;   // binomial SE of the MC fraction
};

std::vector<LimitCurvePoint> laplace_limit_mc(const LimitConfig& config,
                                              Rng& rng);

// Probability that the d-th chop of the unit interval is the first to land
// in [0, x]: x (-log x)^(d-1) / (d-1)!.
double chopping_split_probability(double x, int d);

// Empirical Pr(S_d) for d = 1..max_d from n_runs simulated chopping
// processes (each chop uniform on the interval still attached to 0).
std::vector<double> chopping_simulation(double x, int max_d,
                                        std::int64_t n_runs, Rng& rng);

// Index convention for the depth-weighted series below. The per-level
// product uses pi(i) = alpha (1+i)^(-beta) for i = 1..d; the quoted variant
// uses pi(d)^d.
enum class SeriesIndex { PerLevel, Quoted };

// Separation probability 1 - k(0, x) under the chopping model with the
// depth prior damping each level: sum_d Pr(S_d) * prod pi.
double depth_weighted_separation(double x, double alpha, double beta,
                                 int max_depth = 50,
                                 SeriesIndex index = SeriesIndex::PerLevel);

struct KernelCurveRow {
  double x = 0.0;
  double k_chopping = 0.0;  // 1 - depth_weighted_separation(x, alpha, beta)
  double k_laplace = 0.0;   // exp(log(1-alpha) * x)
};

// Grid comparison of the depth-damped chopping kernel against the Laplace
// kernel with the rate matched at one split level.
std::vector<KernelCurveRow> kernel_comparison_curve(double alpha, double beta,
                                                    int n_grid = 99);

}  // namespace bark
