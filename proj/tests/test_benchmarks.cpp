#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "bark/benchmarks.hpp"

using namespace bark;

namespace {

double ackley_formula(const std::vector<double>& z) {
  const double a = 20.0, b = 0.2, c = 2.0 * 3.14159265358979323846;
  double sq = 0.0, cs = 0.0;
  for (double v : z) {
    sq += v * v;
    cs += std::cos(c * v);
  }
  double d = static_cast<double>(z.size());
  return -a * std::exp(-b * std::sqrt(sq / d)) - std::exp(cs / d) + a +
         std::exp(1.0);
}

double rosenbrock_formula(const std::vector<double>& z) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < z.size(); ++i)
    total += 100.0 * std::pow(z[i + 1] - z[i] * z[i], 2) +
             std::pow(1.0 - z[i], 2);
  return total;
}

double percentile_oracle(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  double h = (v.size() - 1) * p;
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

SamplerConfig eval_config() {
  SamplerConfig c;
  c.m = 10;
  c.chains = 2;
  c.burn_in = 300;
  c.samples_per_chain = 200;
  c.thin = 50;
  return c;
}

}  // namespace

TEST_SUITE("bench-harness") {

TEST_CASE("tree functions are deterministic in their seed") {
  Benchmark a = make_benchmark("tree-function", true, 7);
  Benchmark b = make_benchmark("tree-function", true, 7);
  Benchmark c = make_benchmark("tree-function", true, 8);
  REQUIRE(a.space.dim() == 3);

  Rng rng = make_rng(701);
  bool any_differ = false;
  for (const Point& x : sample_uniform(a.space, 100, rng)) {
    CHECK(a.objective(x) == b.objective(x));
    if (a.objective(x) != c.objective(x)) any_differ = true;
  }
  CHECK(any_differ);
  CHECK(a.optimum.has_value());
  CHECK(*a.optimum == *b.optimum);
}

TEST_CASE("the enumerated optimum lower-bounds and meets dense probing") {
  std::vector<FeatureSpec> specs(1, FeatureSpec::continuous(0.0, 1.0));
  FeatureSpace line{std::move(specs)};
  Benchmark bench = make_tree_function(line, 11, 3);
  REQUIRE(bench.optimum.has_value());
  REQUIRE(bench.optimum_point.has_value());
  CHECK(bench.objective(*bench.optimum_point) == doctest::Approx(*bench.optimum));

  Rng rng = make_rng(709);
  double best = std::numeric_limits<double>::infinity();
  for (const Point& x : sample_uniform(line, 50000, rng)) {
    double v = bench.objective(x);
    CHECK(v >= *bench.optimum - 1e-12);
    best = std::min(best, v);
  }
  // the objective is piecewise constant, so dense probing on one dimension
  // lands in every cell and recovers the enumerated minimum exactly
  CHECK(best == doctest::Approx(*bench.optimum).epsilon(1e-12));
}

TEST_CASE("a stump draw produces a constant objective with itself as optimum") {
  std::vector<FeatureSpec> specs(2, FeatureSpec::continuous(0.0, 1.0));
  FeatureSpace plane{std::move(specs)};
  Rng rng = make_rng(719);

  bool found = false;
  for (std::uint64_t seed = 0; seed < 200 && !found; ++seed) {
    Benchmark bench = make_tree_function(plane, seed, 1);
    std::vector<Point> probes = sample_uniform(plane, 20, rng);
    double first = bench.objective(probes[0]);
    bool constant = true;
    for (const Point& x : probes)
      if (bench.objective(x) != first) constant = false;
    if (!constant) continue;
    found = true;
    REQUIRE(bench.optimum.has_value());
    CHECK(*bench.optimum == first);
  }
  CHECK(found);
}

TEST_CASE("seed-to-seed covariance of tree functions recovers the prior kernel") {
  std::vector<FeatureSpec> specs(1, FeatureSpec::continuous(0.0, 1.0));
  FeatureSpace line{std::move(specs)};
  Point a{0.35}, b{0.60};

  // the generator agreement probability, estimated on prior draws
  Rng rng = make_rng(727);
  const int n_trees = 20000;
  int agree = 0;
  for (int t = 0; t < n_trees; ++t) {
    Tree tree = sample_tree_prior(line, 0.95, 2.0, rng);
    if (leaf_of(tree, a) == leaf_of(tree, b)) ++agree;
  }
  double p_hat = agree / static_cast<double>(n_trees);
  double se_p = std::sqrt(p_hat * (1.0 - p_hat) / n_trees);

  // over independent function draws, E[f(a) f(b)] is that same probability
  const int n_seeds = 4000;
  double sum = 0.0, sum_sq = 0.0;
  for (int seed = 0; seed < n_seeds; ++seed) {
    Benchmark bench = make_tree_function(line, 900000 + seed, 1);
    double prod = bench.objective(a) * bench.objective(b);
    sum += prod;
    sum_sq += prod * prod;
  }
  double cov = sum / n_seeds;
  double se_cov =
      std::sqrt((sum_sq / n_seeds - cov * cov) / n_seeds);
  CHECK(std::abs(cov - p_hat) < 5.0 * std::sqrt(se_p * se_p + se_cov * se_cov));
}

TEST_CASE("the discrete ackley formula matches an independent coding") {
  Rng rng = make_rng(733);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> cont, ints, z;
    for (int i = 0; i < 3; ++i) cont.push_back(uniform_real(rng, -1.0, 1.0));
    for (int i = 0; i < 10; ++i)
      ints.push_back(uniform_int(rng, 0, 1) == 0 ? -1.0 : 1.0);
    z = cont;
    z.insert(z.end(), ints.begin(), ints.end());
    CHECK(discrete_ackley(cont, ints) ==
          doctest::Approx(ackley_formula(z)).epsilon(1e-12));

    // the formula is even in every coordinate
    std::vector<double> cont_neg, ints_neg;
    for (double v : cont) cont_neg.push_back(-v);
    for (double v : ints) ints_neg.push_back(-v);
    CHECK(discrete_ackley(cont_neg, ints_neg) ==
          doctest::Approx(discrete_ackley(cont, ints)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(discrete_ackley({0.0, 0.0}, std::vector<double>(10, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      discrete_ackley({0.0, 0.0, 2.0}, std::vector<double>(10, 1.0)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      discrete_ackley({0.0, 0.0, 0.0}, std::vector<double>(10, 0.5)),
      std::invalid_argument);
}

TEST_CASE("the discrete rosenbrock formula matches an independent coding") {
  Rng rng = make_rng(739);
  const double table[4] = {-5.0, 0.0, 5.0, 10.0};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> cont, ints, z;
    for (int i = 0; i < 4; ++i) cont.push_back(uniform_real(rng, -5.0, 10.0));
    for (int i = 0; i < 6; ++i)
      ints.push_back(table[uniform_int(rng, 0, 3)]);
    z = cont;
    z.insert(z.end(), ints.begin(), ints.end());
    double got = discrete_rosenbrock(cont, ints);
    CHECK(got == doctest::Approx(rosenbrock_formula(z)).epsilon(1e-12));
    CHECK(got >= 0.0);
  }

  CHECK_THROWS_AS(
      discrete_rosenbrock({0.0, 0.0, 0.0, 11.0}, std::vector<double>(6, 0.0)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      discrete_rosenbrock({0.0, 0.0, 0.0, 0.0}, std::vector<double>(6, 1.0)),
      std::invalid_argument);
}

TEST_CASE("the benchmark registry exposes four named problems") {
  Benchmark tf = make_benchmark("tree-function", true, 1);
  CHECK(tf.space.dim() == 3);
  CHECK(tf.optimum.has_value());
  CHECK(make_benchmark("tree-function", false, 1).space.dim() == 10);

  Benchmark cat = make_benchmark("tree-function-cat", true, 1);
  CHECK(cat.space.dim() == 4);
  int n_categorical = 0;
  for (const FeatureSpec& spec : cat.space.features)
    if (spec.kind == FeatureKind::Categorical) ++n_categorical;
  CHECK(n_categorical == 2);
  CHECK(cat.optimum.has_value());

  Benchmark ack = make_benchmark("discrete-ackley", true, 1);
  CHECK(ack.space.dim() == 13);
  REQUIRE(ack.optimum.has_value());
  REQUIRE(ack.optimum_point.has_value());
  CHECK(*ack.optimum ==
        doctest::Approx(20.0 - 20.0 * std::exp(-0.2 * std::sqrt(10.0 / 13.0)))
            .epsilon(1e-12));
  CHECK(ack.objective(*ack.optimum_point) == doctest::Approx(*ack.optimum));
  Rng rng = make_rng(743);
  for (const Point& x : sample_uniform(ack.space, 2000, rng))
    CHECK(ack.objective(x) >= *ack.optimum - 1e-12);

  Benchmark ros = make_benchmark("discrete-rosenbrock", true, 1);
  CHECK(ros.space.dim() == 10);
  CHECK_FALSE(ros.optimum.has_value());
  for (const Point& x : sample_uniform(ros.space, 100, rng))
    CHECK(ros.objective(x) >= 0.0);

  CHECK_THROWS_AS(make_benchmark("no-such-benchmark", true, 1),
                  std::invalid_argument);
}

TEST_CASE("a constant target is predicted exactly") {
  std::vector<FeatureSpec> specs(2, FeatureSpec::continuous(0.0, 1.0));
  FeatureSpace plane{std::move(specs)};
  Rng rng = make_rng(751);
  std::vector<Point> X = sample_uniform(plane, 50, rng);
  std::vector<double> y(X.size(), 4.2);

  RegressionMetrics m = regression_eval(plane, X, y, 3, eval_config());
  CHECK(m.n_test == 10);
  CHECK(m.n_train == 40);
  CHECK(m.mse == 0.0);
  CHECK(std::isfinite(m.nlpd));
}

TEST_CASE("pure noise is scored at its own variance") {
  std::vector<FeatureSpec> specs(2, FeatureSpec::continuous(0.0, 1.0));
  FeatureSpace plane{std::move(specs)};
  const double sigma = 2.5;

  double total_ratio = 0.0;
  const int n_seeds = 10;
  for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
    Rng rng = make_rng(757, seed);
    std::vector<Point> X = sample_uniform(plane, 150, rng);
    std::vector<double> y;
    for (std::size_t i = 0; i < X.size(); ++i)
      y.push_back(sigma * normal(rng));
    RegressionMetrics m =
        regression_eval(plane, X, y, seed, eval_config());
    total_ratio += m.mse / (sigma * sigma);
  }
  CHECK(total_ratio / n_seeds == doctest::Approx(1.0).epsilon(0.25));
}

TEST_CASE("structured data is scored far better than its marginal spread") {
  std::vector<FeatureSpec> specs(1, FeatureSpec::continuous(0.0, 1.0));
  FeatureSpace line{std::move(specs)};
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng rng = make_rng(761, seed);
    std::vector<Point> X = sample_uniform(line, 60, rng);
    std::vector<double> y;
    for (const Point& x : X)
      y.push_back((x[0] > 0.5 ? 1.0 : -1.0) + 0.1 * normal(rng));

    RegressionMetrics m = regression_eval(line, X, y, seed, eval_config());
    // the marginal Gaussian fit scores about 0.5 log(2 pi e) = 1.42 here
    CHECK(m.nlpd < 1.0);
    CHECK(m.mse < 0.3);
  }
}

TEST_CASE("the evaluator validates its inputs") {
  std::vector<FeatureSpec> specs(1, FeatureSpec::continuous(0.0, 1.0));
  FeatureSpace line{std::move(specs)};
  Rng rng = make_rng(769);
  std::vector<Point> X = sample_uniform(line, 12, rng);
  std::vector<double> y(12, 0.0);
  CHECK_THROWS_AS(
      regression_eval(line, {X.begin(), X.begin() + 5},
                      {y.begin(), y.begin() + 5}, 1, eval_config()),
      std::invalid_argument);
  CHECK_THROWS_AS(
      regression_eval(line, X, {y.begin(), y.begin() + 5}, 1, eval_config()),
      std::invalid_argument);
  CHECK_THROWS_AS(regression_eval(line, X, y, 1, eval_config(), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(regression_eval(line, X, y, 1, eval_config(), 1.0),
                  std::invalid_argument);
}

TEST_CASE("percentiles follow the linear interpolation convention") {
  CHECK(percentile({1.0, 2.0, 3.0, 4.0}, 0.5) == doctest::Approx(2.5));
  CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 0.0) == doctest::Approx(1.0));
  CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 1.0) == doctest::Approx(4.0));
  CHECK(percentile({7.5}, 0.3) == doctest::Approx(7.5));

  Rng rng = make_rng(773);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v;
    int n = 1 + static_cast<int>(uniform_int(rng, 0, 30));
    for (int i = 0; i < n; ++i) v.push_back(normal(rng));
    double p = uniform01(rng);
    CHECK(percentile(v, p) ==
          doctest::Approx(percentile_oracle(v, p)).epsilon(1e-12));
  }
}

TEST_CASE("simple regret subtracts the optimum and stays nonnegative") {
  std::vector<double> best = {5.0, 3.0, 3.0, 2.0, 2.0};
  std::vector<double> regret = simple_regret(best, 2.0);
  CHECK(regret == std::vector<double>{3.0, 1.0, 1.0, 0.0, 0.0});
  for (std::size_t i = 1; i < regret.size(); ++i)
    CHECK(regret[i] <= regret[i - 1]);
}

TEST_CASE("regret summaries reduce seed traces with percentiles") {
  std::vector<std::vector<double>> traces = {
      {5.0, 4.0, 1.0}, {6.0, 2.0, 2.0}, {4.0, 4.0, 4.0}, {8.0, 3.0, 1.0}};
  double optimum = 1.0;
  RegretSummary summary = regret_report(traces, optimum);
  REQUIRE(summary.median.size() == 3);
  REQUIRE(summary.q25.size() == 3);
  REQUIRE(summary.q75.size() == 3);
  for (int it = 0; it < 3; ++it) {
    std::vector<double> column;
    for (const std::vector<double>& trace : traces)
      column.push_back(trace[it] - optimum);
    CHECK(summary.median[it] ==
          doctest::Approx(percentile_oracle(column, 0.5)).epsilon(1e-14));
    CHECK(summary.q25[it] ==
          doctest::Approx(percentile_oracle(column, 0.25)).epsilon(1e-14));
    CHECK(summary.q75[it] ==
          doctest::Approx(percentile_oracle(column, 0.75)).epsilon(1e-14));
  }

  std::vector<std::vector<double>> ragged = {{1.0, 2.0}, {1.0}};
  CHECK_THROWS_AS(regret_report(ragged, 0.0), std::invalid_argument);
}

}  // TEST_SUITE
