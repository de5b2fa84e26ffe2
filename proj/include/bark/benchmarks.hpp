#pragma once

#include <functional>
#include <optional>
#include <string>

#include "bark/feature_space.hpp"
#include "bark/sampler.hpp"

namespace bark {

// A named objective over a mixed search space, minimized by the BO loop.
// Non-contiguous integer sets (DiscreteAckley's {-1,1}, DiscreteRosenbrock's
// {-5,0,5,10}) are exposed to the optimizer as index-coded Integer features;
// the objective decodes indices to the underlying values.
struct Benchmark {
  std::string name;
  FeatureSpace space;
  std::function<double(const Point&)> objective;
  std::optional<double> optimum;      // known minimum value
  std::optional<Point> optimum_point;
};

// Piecewise-constant objective sampled from the depth prior: a fixed-seed
// forest with leaf values drawn Normal(0, 1/n_trees). The exact minimum is
// found by enumerating the forest's cell partition (skipped, leaving optimum
// unset, if the cell count exceeds one million).
Benchmark make_tree_function(const FeatureSpace& space, std::uint64_t seed,
                             int n_trees);

// Reference formulas on the concatenated (continuous, integer-valued)
// vector; throw on out-of-domain arguments.
double discrete_ackley(const std::vector<double>& x_cont,
                       const std::vector<double>& x_int);
double discrete_rosenbrock(const std::vector<double>& x_cont,
                           const std::vector<double>& x_int);

// Known names: tree-function, tree-function-cat, discrete-ackley,
// discrete-rosenbrock. desk_scale shrinks the tree-function domains for fast
// runs; the fixed-formula benchmarks keep their canonical domains.
Benchmark make_benchmark(const std::string& name, bool desk_scale,
                         std::uint64_t seed);

struct RegressionMetrics {
  double nlpd = 0.0;  // mean negative log predictive density, raw scale
  double mse = 0.0;   // mean squared error of the mixture mean, raw scale
  int n_train = 0;
  int n_test = 0;
};

// Random train/test split (default 80/20), fit on train, score on test.
RegressionMetrics regression_eval(const FeatureSpace& space,
                                  const std::vector<Point>& X,
                                  const std::vector<double>& y_raw,
                                  std::uint64_t split_seed,
                                  const SamplerConfig& config,
                                  double test_fraction = 0.2);

// regret_t = best_so_far_t - optimum for a minimization trace.
std::vector<double> simple_regret(const std::vector<double>& best_so_far,
                                  double optimum);

// Linear-interpolation percentile on sorted order statistics
// (h = (n-1) p, the convention numpy calls "linear").
double percentile(std::vector<double> values, double p);

struct RegretSummary {
  std::vector<double> median, q25, q75;  // per iteration, across seeds
};

// Per-iteration median and interquartile range of simple regret across
// seeds; all traces must share one length.
RegretSummary regret_report(
    const std::vector<std::vector<double>>& best_so_far_per_seed,
    double optimum);

}  // namespace bark
