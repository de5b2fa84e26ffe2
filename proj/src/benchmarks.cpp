#include "bark/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "bark/tree.hpp"

namespace bark {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Common refinement of the forest's leaf partitions; the sampled objective
// is constant on each cell.
std::vector<Box> forest_cells(const FeatureSpace& space, const Forest& forest,
                              std::size_t guard) {
  std::vector<Box> cells{full_box(space)};
  for (const Tree& tree : forest.trees) {
    if (tree.is_stump()) continue;
    std::vector<Box> leaves = leaf_boxes(space, tree);
    std::vector<Box> next;
    for (const Box& cell : cells) {
      for (const Box& leaf : leaves) {
        Box inter;
        if (!box_intersect(space, cell, leaf, &inter)) continue;
        next.push_back(std::move(inter));
        if (next.size() > guard)
          throw std::runtime_error("cell count guard exceeded");
      }
    }
    cells = std::move(next);
  }
  return cells;
}

bool lex_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void check_value_set(const std::vector<double>& x,
                     const std::vector<double>& allowed, const char* what) {
  for (double v : x)
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
      throw std::invalid_argument(std::string(what) +
                                  ": integer coordinate outside value set");
}

FeatureSpace repeated_space(std::vector<FeatureSpec> specs) {
  return FeatureSpace(std::move(specs));
}

}  // namespace

Benchmark make_tree_function(const FeatureSpace& space, std::uint64_t seed,
                             int n_trees) {
  if (n_trees < 1) throw std::invalid_argument("n_trees must be positive");
  if (space.dim() == 0) throw std::invalid_argument("empty space");

  Rng rng = make_rng(seed, 31);
  UniformSplits splits;
  auto forest = std::make_shared<Forest>(
      sample_forest_prior(space, n_trees, 0.95, 2.0, rng, splits));
  auto values = std::make_shared<std::vector<std::vector<double>>>();
  double sd = std::sqrt(1.0 / n_trees);
  for (const Tree& tree : forest->trees) {
    std::vector<double> leaf_values(tree.n_leaves);
    for (double& v : leaf_values) v = normal(rng, 0.0, sd);
    values->push_back(std::move(leaf_values));
  }

  Benchmark b;
  b.name = "tree-function";
  b.space = space;
  b.objective = [space, forest, values](const Point& x) {
    validate_point(space, x);
    double total = 0.0;
    for (std::size_t t = 0; t < forest->trees.size(); ++t)
      total += (*values)[t][leaf_of(forest->trees[t], x)];
    return total;
  };

  try {
    std::vector<Box> cells = forest_cells(space, *forest, 1000000);
    for (const Box& cell : cells) {
      Point rep = representative_point(space, cell);
      double v = b.objective(rep);
      if (!b.optimum || v < *b.optimum ||
          (v == *b.optimum && lex_less(rep, *b.optimum_point))) {
        b.optimum = v;
        b.optimum_point = std::move(rep);
      }
    }
  } catch (const std::runtime_error&) {
    b.optimum.reset();
    b.optimum_point.reset();
  }
  return b;
}

double discrete_ackley(const std::vector<double>& x_cont,
                       const std::vector<double>& x_int) {
  if (x_cont.size() != 3 || x_int.size() != 10)
    throw std::invalid_argument("discrete_ackley expects 3 + 10 coordinates");
  for (double v : x_cont)
    if (v < -1.0 || v > 1.0)
      throw std::invalid_argument("discrete_ackley: continuous out of [-1,1]");
  check_value_set(x_int, {-1.0, 1.0}, "discrete_ackley");

  const double a = 20.0, b = 0.2, c = 2.0 * kPi;
  std::vector<double> z(x_cont);
  z.insert(z.end(), x_int.begin(), x_int.end());
  const double d = static_cast<double>(z.size());
  double sq = 0.0, cs = 0.0;
  for (double v : z) {
    sq += v * v;
    cs += std::cos(c * v);
  }
  return -a * std::exp(-b * std::sqrt(sq / d)) - std::exp(cs / d) + a +
         std::exp(1.0);
}

double discrete_rosenbrock(const std::vector<double>& x_cont,
                           const std::vector<double>& x_int) {
  if (x_cont.size() != 4 || x_int.size() != 6)
    throw std::invalid_argument(
        "discrete_rosenbrock expects 4 + 6 coordinates");
  for (double v : x_cont)
    if (v < -5.0 || v > 10.0)
      throw std::invalid_argument(
          "discrete_rosenbrock: continuous out of [-5,10]");
  check_value_set(x_int, {-5.0, 0.0, 5.0, 10.0}, "discrete_rosenbrock");

  std::vector<double> z(x_cont);
  z.insert(z.end(), x_int.begin(), x_int.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < z.size(); ++i) {
    double t1 = z[i + 1] - z[i] * z[i];
    double t2 = 1.0 - z[i];
    total += 100.0 * t1 * t1 + t2 * t2;
  }
  return total;
}

Benchmark make_benchmark(const std::string& name, bool desk_scale,
                         std::uint64_t seed) {
  if (name == "tree-function") {
    int d = desk_scale ? 3 : 10;
    std::vector<FeatureSpec> specs(d, FeatureSpec::continuous(0.0, 1.0));
    Benchmark b = make_tree_function(repeated_space(std::move(specs)), seed, 20);
    b.name = name;
    return b;
  }
  if (name == "tree-function-cat") {
    std::vector<FeatureSpec> specs;
    int d_cont = desk_scale ? 2 : 10;
    int d_cat = desk_scale ? 2 : 10;
    int n_cat = desk_scale ? 3 : 5;
    for (int i = 0; i < d_cont; ++i)
      specs.push_back(FeatureSpec::continuous(0.0, 1.0));
    for (int i = 0; i < d_cat; ++i)
      specs.push_back(FeatureSpec::categorical(n_cat));
    Benchmark b = make_tree_function(repeated_space(std::move(specs)), seed, 20);
    b.name = name;
    return b;
  }
  if (name == "discrete-ackley") {
    std::vector<FeatureSpec> specs(3, FeatureSpec::continuous(-1.0, 1.0));
    for (int i = 0; i < 10; ++i) specs.push_back(FeatureSpec::integer(0, 1));
    Benchmark b;
    b.name = name;
    b.space = repeated_space(std::move(specs));
    FeatureSpace space = b.space;
    b.objective = [space](const Point& x) {
      validate_point(space, x);
      std::vector<double> cont(x.begin(), x.begin() + 3);
      std::vector<double> ints;
      for (std::size_t j = 3; j < x.size(); ++j)
        ints.push_back(x[j] == 0.0 ? -1.0 : 1.0);
      return discrete_ackley(cont, ints);
    };
    // Both Ackley terms are simultaneously optimal at zero continuous
    // coordinates and unit-magnitude integers, so this point is the global
    // constrained minimum.
    Point opt(13, 1.0);
    opt[0] = opt[1] = opt[2] = 0.0;
    b.optimum = b.objective(opt);
    b.optimum_point = std::move(opt);
    return b;
  }
  if (name == "discrete-rosenbrock") {
    std::vector<FeatureSpec> specs(4, FeatureSpec::continuous(-5.0, 10.0));
    for (int i = 0; i < 6; ++i) specs.push_back(FeatureSpec::integer(0, 3));
    Benchmark b;
    b.name = name;
    b.space = repeated_space(std::move(specs));
    FeatureSpace space = b.space;
    b.objective = [space](const Point& x) {
      validate_point(space, x);
      static const double table[4] = {-5.0, 0.0, 5.0, 10.0};
      std::vector<double> cont(x.begin(), x.begin() + 4);
      std::vector<double> ints;
      for (std::size_t j = 4; j < x.size(); ++j)
        ints.push_back(table[static_cast<int>(x[j])]);
      return discrete_rosenbrock(cont, ints);
    };
    // No coordinate assignment from {-5,0,5,10} makes the chain terms
    // vanish, so the unconstrained optimum is unattainable and no closed-form
    // constrained optimum is known.
    return b;
  }
  throw std::invalid_argument("unknown benchmark: " + name);
}

RegressionMetrics regression_eval(const FeatureSpace& space,
                                  const std::vector<Point>& X,
                                  const std::vector<double>& y_raw,
                                  std::uint64_t split_seed,
                                  const SamplerConfig& config,
                                  double test_fraction) {
  const int n = static_cast<int>(X.size());
  if (n < 10) throw std::invalid_argument("regression_eval needs >= 10 rows");
  if (y_raw.size() != X.size())
    throw std::invalid_argument("X and y length mismatch");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("test_fraction must lie in (0,1)");

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = make_rng(split_seed, 404);
  std::shuffle(idx.begin(), idx.end(), rng);

  int n_test = std::max(1, static_cast<int>(std::llround(test_fraction * n)));
  int n_train = n - n_test;
  if (n_train < 2) throw std::invalid_argument("degenerate split");

  std::vector<Point> X_train, X_test;
  std::vector<double> y_train, y_test;
  for (int i = 0; i < n_train; ++i) {
    X_train.push_back(X[idx[i]]);
    y_train.push_back(y_raw[idx[i]]);
  }
  for (int i = n_train; i < n; ++i) {
    X_test.push_back(X[idx[i]]);
    y_test.push_back(y_raw[idx[i]]);
  }

  Dataset data = standardize(std::move(X_train), std::move(y_train));
  NoisePrior prior = make_noise_prior(config.nu, config.q);
  PosteriorEnsemble ens = run_chains(space, data, config, prior, split_seed);

  RegressionMetrics m;
  m.n_train = n_train;
  m.n_test = n_test;
  double nlpd = 0.0;
  for (int i = 0; i < n_test; ++i)
    nlpd += mixture_nlpd(ens, data, X_test[i], y_test[i]);
  m.nlpd = nlpd / n_test;
  m.mse = mixture_mse(ens, data, X_test, y_test);
  return m;
}

std::vector<double> simple_regret(const std::vector<double>& best_so_far,
                                  double optimum) {
  std::vector<double> regret(best_so_far.size());
  for (std::size_t i = 0; i < best_so_far.size(); ++i)
    regret[i] = best_so_far[i] - optimum;
  return regret;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of empty set");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("percentile p must lie in [0,1]");
  std::sort(values.begin(), values.end());
  double h = (static_cast<double>(values.size()) - 1.0) * p;
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

RegretSummary regret_report(
    const std::vector<std::vector<double>>& best_so_far_per_seed,
    double optimum) {
  if (best_so_far_per_seed.empty())
    throw std::invalid_argument("regret_report needs >= 1 trace");
  std::size_t len = best_so_far_per_seed.front().size();
  for (const auto& trace : best_so_far_per_seed)
    if (trace.size() != len)
      throw std::invalid_argument("traces must share one length");

  RegretSummary out;
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<double> regrets;
    regrets.reserve(best_so_far_per_seed.size());
    for (const auto& trace : best_so_far_per_seed)
      regrets.push_back(trace[i] - optimum);
    out.median.push_back(percentile(regrets, 0.5));
    out.q25.push_back(percentile(regrets, 0.25));
    out.q75.push_back(percentile(regrets, 0.75));
  }
  return out;
}

}  // namespace bark
