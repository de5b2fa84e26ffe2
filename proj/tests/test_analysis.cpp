#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bark/analysis.hpp"

using namespace bark;

namespace {

double chopping_pin(double x, int d) {
  return x * std::pow(-std::log(x), d - 1) / std::exp(std::lgamma(d));
}

double series_oracle(double x, double alpha, double beta, int max_depth,
                     SeriesIndex index) {
  double total = 0.0;
  for (int d = 1; d <= max_depth; ++d) {
    double damp;
    if (index == SeriesIndex::PerLevel) {
      damp = 1.0;
      for (int i = 1; i <= d; ++i) damp *= alpha * std::pow(1.0 + i, -beta);
    } else {
      damp = std::pow(alpha * std::pow(1.0 + d, -beta), d);
    }
    total += chopping_pin(x, d) * damp;
  }
  return total;
}

}  // namespace

TEST_SUITE("kernel-analysis") {

TEST_CASE("the idealized forest keeps coincident probes together") {
  LimitConfig config;
  config.lambda = 1.0;
  config.dim = 2;
  config.n_trees = 2000;
  config.probes = {{Point{0.3, 0.7}, Point{0.3, 0.7}}};
  Rng rng = make_rng(601);
  std::vector<LimitCurvePoint> rows = laplace_limit_mc(config, rng);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].l1 == 0.0);
  CHECK(rows[0].empirical == 1.0);
  CHECK(rows[0].theoretical == 1.0);
}

TEST_CASE("the one-dimensional limit curve matches its exponential") {
  LimitConfig config;
  config.lambda = 1.0;
  config.dim = 1;
  config.n_trees = 20000;
  for (double t : {0.1, 0.3, 0.5, 0.8})
    config.probes.push_back({Point{0.2}, Point{0.2 + t}});
  Rng rng = make_rng(607);
  std::vector<LimitCurvePoint> rows = laplace_limit_mc(config, rng);
  REQUIRE(rows.size() == 4);
  for (const LimitCurvePoint& row : rows) {
    CHECK(row.theoretical == doctest::Approx(std::exp(-row.l1)).epsilon(1e-12));
    CHECK(std::abs(row.empirical - row.theoretical) < 5.0 * row.std_error);
    CHECK(row.std_error ==
          doctest::Approx(std::sqrt(row.empirical * (1.0 - row.empirical) /
                                    config.n_trees))
              .epsilon(1e-12));
  }
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].theoretical < rows[i - 1].theoretical);
}

TEST_CASE("higher dimensions divide the separation rate") {
  LimitConfig config;
  config.lambda = 2.0;
  config.dim = 4;
  config.n_trees = 20000;
  config.probes = {{Point{0.1, 0.2, 0.3, 0.4}, Point{0.5, 0.2, 0.7, 0.4}}};
  Rng rng = make_rng(613);
  std::vector<LimitCurvePoint> rows = laplace_limit_mc(config, rng);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].l1 == doctest::Approx(0.8));
  CHECK(rows[0].theoretical ==
        doctest::Approx(std::exp(-2.0 * 0.8 / 4.0)).epsilon(1e-12));
  CHECK(std::abs(rows[0].empirical - rows[0].theoretical) <
        5.0 * rows[0].std_error);
}

TEST_CASE("the limit residual shrinks like the root of the tree count") {
  LimitConfig small;
  small.lambda = 1.0;
  small.dim = 1;
  small.n_trees = 2000;
  for (int i = 1; i <= 8; ++i)
    small.probes.push_back({Point{0.1}, Point{0.1 + 0.1 * i}});
  LimitConfig large = small;
  large.n_trees = 32000;

  Rng rng_small = make_rng(617);
  Rng rng_large = make_rng(619);
  std::vector<LimitCurvePoint> rows_small = laplace_limit_mc(small, rng_small);
  std::vector<LimitCurvePoint> rows_large = laplace_limit_mc(large, rng_large);

  double resid_small = 0.0, resid_large = 0.0;
  for (std::size_t i = 0; i < rows_small.size(); ++i) {
    resid_small += std::abs(rows_small[i].empirical - rows_small[i].theoretical);
    resid_large += std::abs(rows_large[i].empirical - rows_large[i].theoretical);
  }
  // a 16x tree budget cuts the expected residual 4x; 0.7 leaves wide slack
  CHECK(resid_large < 0.7 * resid_small);
}

TEST_CASE("the limit generator validates its configuration") {
  LimitConfig config;
  config.probes = {{Point{0.5}, Point{0.5}}};
  Rng rng = make_rng(621);

  LimitConfig bad = config;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(laplace_limit_mc(bad, rng), std::invalid_argument);
  bad = config;
  bad.n_trees = 10;
  CHECK_THROWS_AS(laplace_limit_mc(bad, rng), std::invalid_argument);
  bad = config;
  bad.probes = {{Point{0.5}, Point{1.5}}};
  CHECK_THROWS_AS(laplace_limit_mc(bad, rng), std::invalid_argument);
  bad = config;
  bad.probes.clear();
  CHECK_THROWS_AS(laplace_limit_mc(bad, rng), std::invalid_argument);
}

TEST_CASE("first-chop probabilities pin to closed forms") {
  CHECK(chopping_split_probability(0.3, 1) == doctest::Approx(0.3));
  CHECK(chopping_split_probability(0.5, 2) ==
        doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-14));

  Rng rng = make_rng(631);
  for (int trial = 0; trial < 200; ++trial) {
    double x = uniform_real(rng, 0.01, 0.99);
    int d = 1 + static_cast<int>(uniform_int(rng, 0, 9));
    CHECK(chopping_split_probability(x, d) ==
          doctest::Approx(chopping_pin(x, d)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(chopping_split_probability(0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(chopping_split_probability(1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(chopping_split_probability(0.5, 0), std::invalid_argument);
}

TEST_CASE("chop depths form a complete distribution") {
  for (double x : {0.1, 0.3, 0.9}) {
    double total = 0.0;
    for (int d = 1; d <= 60; ++d) total += chopping_split_probability(x, d);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("simulated chopping matches the closed form") {
  Rng rng = make_rng(641);
  for (double x : {0.1, 0.3, 0.5, 0.9}) {
    const std::int64_t n = 50000;
    std::vector<double> emp = chopping_simulation(x, 6, n, rng);
    REQUIRE(emp.size() == 6);
    double total = 0.0;
    for (int d = 1; d <= 6; ++d) {
      double p = chopping_split_probability(x, d);
      double se = std::sqrt(p * (1.0 - p) / n);
      CHECK(std::abs(emp[d - 1] - p) < 5.0 * se + 1e-9);
      CHECK(emp[d - 1] >= 0.0);
      total += emp[d - 1];
    }
    CHECK(total <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS(chopping_simulation(1.2, 5, 100, rng), std::invalid_argument);
  CHECK_THROWS_AS(chopping_simulation(0.5, 0, 100, rng), std::invalid_argument);
}

TEST_CASE("depth-weighted separation reduces to its series") {
  Rng rng = make_rng(643);
  for (int trial = 0; trial < 50; ++trial) {
    double x = uniform_real(rng, 0.05, 0.95);
    double alpha = uniform_real(rng, 0.1, 0.99);
    double beta = uniform_real(rng, 0.0, 3.0);
    for (SeriesIndex index : {SeriesIndex::PerLevel, SeriesIndex::Quoted})
      CHECK(depth_weighted_separation(x, alpha, beta, 50, index) ==
            doctest::Approx(series_oracle(x, alpha, beta, 50, index))
                .epsilon(1e-12));
  }
}

TEST_CASE("depth-weighted separation limits and monotonicity") {
  CHECK(depth_weighted_separation(0.5, 0.0, 2.0) == 0.0);
  // undamped: separation is certain, so the series sums to one
  CHECK(depth_weighted_separation(0.5, 1.0, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-10));

  double prev = 0.0;
  for (double x : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    double sep = depth_weighted_separation(x, 0.95, 2.0);
    CHECK(sep > prev);
    CHECK(sep < 1.0);
    prev = sep;
  }

  CHECK_THROWS_AS(depth_weighted_separation(0.0, 0.9, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(depth_weighted_separation(0.5, -0.1, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(depth_weighted_separation(0.5, 0.9, 2.0, 0),
                  std::invalid_argument);
}

TEST_CASE("the two series index conventions genuinely differ") {
  // at depth d the per-level product multiplies d distinct damping factors
  // while the quoted form raises the last one to the d-th power
  double per = depth_weighted_separation(0.5, 0.95, 2.0, 50,
                                         SeriesIndex::PerLevel);
  double quoted = depth_weighted_separation(0.5, 0.95, 2.0, 50,
                                            SeriesIndex::Quoted);
  CHECK(std::abs(per - quoted) > 1e-3);
}

TEST_CASE("the kernel comparison curve exposes a visible mismatch") {
  std::vector<KernelCurveRow> rows = kernel_comparison_curve(0.95, 2.0);
  REQUIRE(rows.size() == 99);
  double sup = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const KernelCurveRow& row = rows[i];
    CHECK(row.x == doctest::Approx((i + 1) / 100.0));
    CHECK(row.k_chopping ==
          doctest::Approx(1.0 - depth_weighted_separation(row.x, 0.95, 2.0))
              .epsilon(1e-12));
    CHECK(row.k_laplace ==
          doctest::Approx(std::exp(std::log(0.05) * row.x)).epsilon(1e-12));
    CHECK(row.k_chopping >= 0.0);
    CHECK(row.k_chopping <= 1.0);
    CHECK(row.k_laplace >= 0.0);
    CHECK(row.k_laplace <= 1.0);
    sup = std::max(sup, std::abs(row.k_chopping - row.k_laplace));
  }
  // the depth-damped kernel is not the Laplace kernel; the gap is material
  CHECK(sup > 0.05);

  CHECK_THROWS_AS(kernel_comparison_curve(0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(kernel_comparison_curve(0.95, 2.0, 0), std::invalid_argument);
}

}  // TEST_SUITE
