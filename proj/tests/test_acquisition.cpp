#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bark/acquisition.hpp"

using namespace bark;

namespace {

FeatureSpace unit_cube(int dim) {
  std::vector<FeatureSpec> specs;
  for (int f = 0; f < dim; ++f)
    specs.push_back(FeatureSpec::continuous(0.0, 1.0));
  return FeatureSpace{std::move(specs)};
}

FeatureSpace mixed_space() {
  std::vector<FeatureSpec> specs;
  specs.push_back(FeatureSpec::continuous(0.0, 1.0));
  specs.push_back(FeatureSpec::integer(-2, 2));
  specs.push_back(FeatureSpec::categorical(3));
  return FeatureSpace{std::move(specs)};
}

SplitRule numeric_rule(int feature, double threshold) {
  SplitRule r;
  r.feature = feature;
  r.threshold = threshold;
  return r;
}

// Small fitted ensemble with bounded tree depth so exhaustive enumeration
// stays cheap.
PosteriorEnsemble small_ensemble(const FeatureSpace& space, int n_states,
                                 int m, int n_data, Rng& rng,
                                 int max_depth = 2) {
  std::vector<Point> X = sample_uniform(space, n_data, rng);
  std::vector<double> y;
  for (const Point& x : X) y.push_back(std::sin(4.0 * x[0]) + 0.3 * normal(rng));
  Dataset data = standardize(std::move(X), std::move(y));

  UniformSplits splits;
  PosteriorEnsemble ens;
  for (int s = 0; s < n_states; ++s) {
    Forest forest =
        sample_forest_prior(space, m, 0.9, 1.2, rng, splits, max_depth);
    ens.states.push_back(
        make_gp_state(std::move(forest), uniform_real(rng, 0.05, 0.3), data));
  }
  return ens;
}

PosteriorEnsemble stump_ensemble(const FeatureSpace& space, int n_states,
                                 Rng& rng) {
  std::vector<Point> X = sample_uniform(space, 8, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < X.size(); ++i) y.push_back(normal(rng));
  Dataset data = standardize(std::move(X), std::move(y));
  Forest forest;
  for (int t = 0; t < 3; ++t) forest.trees.push_back(Tree::single_leaf());
  PosteriorEnsemble ens;
  for (int s = 0; s < n_states; ++s)
    ens.states.push_back(make_gp_state(forest, 0.2, data));
  return ens;
}

Box point_box(const FeatureSpace& space, const Point& x) {
  Box box = full_box(space);
  for (int f = 0; f < space.dim(); ++f) {
    if (space.features[f].kind == FeatureKind::Categorical)
      box.axes[f].cats = 1ull << static_cast<int>(x[f]);
    else
      box.axes[f].lo = box.axes[f].hi = x[f];
  }
  return box;
}

}  // namespace

TEST_SUITE("acquisition") {

TEST_CASE("integrated score averages the per-state upper confidence values") {
  FeatureSpace space = unit_cube(2);
  Rng rng = make_rng(431);
  PosteriorEnsemble ens = small_ensemble(space, 3, 4, 20, rng);

  for (const Point& x : sample_uniform(space, 50, rng)) {
    double oracle = 0.0;
    for (const GpState& s : ens.states) {
      PredictiveGaussian p = predict(s, x);
      oracle += p.mean + 1.3 * std::sqrt(p.var);
    }
    oracle /= ens.size();
    CHECK(integrated_ucb(ens, space, x, 1.3) ==
          doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("duplicating a state leaves the integrated score unchanged") {
  FeatureSpace space = unit_cube(1);
  Rng rng = make_rng(433);
  PosteriorEnsemble one = small_ensemble(space, 1, 3, 10, rng);
  PosteriorEnsemble two;
  two.states.push_back(one.states[0]);
  two.states.push_back(one.states[0]);
  Point x{0.37};
  CHECK(integrated_ucb(one, space, x, 2.0) ==
        doctest::Approx(integrated_ucb(two, space, x, 2.0)).epsilon(1e-14));
}

TEST_CASE("with zero kappa the score is the posterior mean mixture") {
  FeatureSpace space = unit_cube(2);
  Rng rng = make_rng(439);
  PosteriorEnsemble ens = small_ensemble(space, 2, 4, 15, rng);
  for (const Point& x : sample_uniform(space, 20, rng)) {
    double mean = 0.0;
    for (const GpState& s : ens.states) mean += predict(s, x).mean;
    mean /= ens.size();
    CHECK(integrated_ucb(ens, space, x, 0.0) == doctest::Approx(mean));
  }
}

TEST_CASE("reachability over the full domain lists every leaf") {
  FeatureSpace space = mixed_space();
  Rng rng = make_rng(443);
  for (int trial = 0; trial < 30; ++trial) {
    Tree tree = sample_tree_prior(space, 0.9, 1.0, rng);
    std::vector<int> got = leaf_reachability(space, tree, full_box(space));
    REQUIRE(static_cast<int>(got.size()) == tree.n_leaves);
    for (int i = 0; i < tree.n_leaves; ++i) CHECK(got[i] == i);
  }
}

TEST_CASE("reachability respects a single numeric split") {
  FeatureSpace space = unit_cube(1);
  Tree tree = grow_at(Tree::single_leaf(), 0, numeric_rule(0, 0.5));

  Box left = full_box(space);
  left.axes[0].hi = 0.4;
  CHECK(leaf_reachability(space, tree, left) == std::vector<int>{0});

  Box right = full_box(space);
  right.axes[0].lo = 0.6;
  CHECK(leaf_reachability(space, tree, right) == std::vector<int>{1});

  CHECK(leaf_reachability(space, tree, full_box(space)) ==
        std::vector<int>{0, 1});

  // a degenerate box at the threshold touches both closed leaf regions
  Box at = full_box(space);
  at.axes[0].lo = at.axes[0].hi = 0.5;
  CHECK(leaf_reachability(space, tree, at) == std::vector<int>{0, 1});
}

TEST_CASE("reachability matches the box-intersection oracle") {
  FeatureSpace space = mixed_space();
  Rng rng = make_rng(449);
  for (int trial = 0; trial < 100; ++trial) {
    Tree tree = sample_tree_prior(space, 0.9, 1.0, rng);

    Box query = full_box(space);
    double a = uniform_real(rng, 0.0, 1.0), b = uniform_real(rng, 0.0, 1.0);
    query.axes[0].lo = std::min(a, b);
    query.axes[0].hi = std::max(a, b);
    long long ia = uniform_int(rng, -2, 2), ib = uniform_int(rng, -2, 2);
    query.axes[1].lo = static_cast<double>(std::min(ia, ib));
    query.axes[1].hi = static_cast<double>(std::max(ia, ib));
    query.axes[2].cats = 1 + static_cast<std::uint64_t>(uniform_int(rng, 0, 6));

    std::vector<int> got = leaf_reachability(space, tree, query);
    std::vector<Box> boxes = leaf_boxes(space, tree);
    std::vector<int> want;
    for (int l = 0; l < tree.n_leaves; ++l) {
      Box out;
      if (box_intersect(space, boxes[l], query, &out)) want.push_back(l);
    }
    CHECK(got == want);

    // every sampled point lands in a leaf the reachability set admits
    if (!got.empty())
      for (int probe = 0; probe < 20; ++probe) {
        Point x = sample_uniform_in_box(space, query, rng);
        int leaf = leaf_of(tree, x);
        CHECK(std::find(got.begin(), got.end(), leaf) != got.end());
      }
  }
}

TEST_CASE("the box bound is admissible") {
  FeatureSpace space = mixed_space();
  Rng rng = make_rng(457);
  for (int trial = 0; trial < 40; ++trial) {
    PosteriorEnsemble ens = small_ensemble(space, 2, 3, 12, rng);

    Box query = full_box(space);
    double a = uniform_real(rng, 0.0, 1.0), b = uniform_real(rng, 0.0, 1.0);
    query.axes[0].lo = std::min(a, b);
    query.axes[0].hi = std::max(a, b);
    query.axes[2].cats = 1 + static_cast<std::uint64_t>(uniform_int(rng, 0, 6));

    double bound = ucb_upper_bound(ens, space, query, 1.96);
    for (int probe = 0; probe < 25; ++probe) {
      Point x = sample_uniform_in_box(space, query, rng);
      CHECK(bound >= integrated_ucb(ens, space, x, 1.96) - 1e-10);
    }
  }
}

TEST_CASE("the full-domain bound dominates a dense probe sweep") {
  FeatureSpace space = unit_cube(2);
  Rng rng = make_rng(461);
  PosteriorEnsemble ens = small_ensemble(space, 3, 5, 25, rng, 3);
  double bound = ucb_upper_bound(ens, space, full_box(space), 1.96);
  for (const Point& x : sample_uniform(space, 10000, rng))
    CHECK(bound >= integrated_ucb(ens, space, x, 1.96) - 1e-10);
}

TEST_CASE("the bound is exact at generic singleton boxes") {
  FeatureSpace space = unit_cube(2);
  Rng rng = make_rng(463);
  PosteriorEnsemble ens = small_ensemble(space, 2, 4, 15, rng);
  for (int trial = 0; trial < 30; ++trial) {
    Point x = sample_uniform(space, 1, rng)[0];
    Box box = point_box(space, x);
    // kappa 0 isolates the mean part, which is exact when each tree reaches
    // a single leaf
    CHECK(ucb_upper_bound(ens, space, box, 0.0) ==
          doctest::Approx(integrated_ucb(ens, space, x, 0.0)).epsilon(1e-10));
    // with kappa the bound replaces each state's sd by sigma0 = 1
    double kappa = 1.96;
    double mean_part = integrated_ucb(ens, space, x, 0.0);
    CHECK(ucb_upper_bound(ens, space, box, kappa) ==
          doctest::Approx(mean_part + kappa).epsilon(1e-10));
    CHECK(ucb_upper_bound(ens, space, box, kappa) >=
          integrated_ucb(ens, space, x, kappa) - 1e-10);
  }
}

TEST_CASE("the bound is exact on boxes inside a single partition cell") {
  FeatureSpace space = unit_cube(2);
  Rng rng = make_rng(467);
  PosteriorEnsemble ens = small_ensemble(space, 2, 3, 12, rng);
  std::vector<Box> cells = partition_cells(ens, space);
  for (const Box& cell : cells) {
    Point inside = sample_uniform_in_box(space, cell, rng);
    CHECK(ucb_upper_bound(ens, space, cell, 0.0) ==
          doctest::Approx(integrated_ucb(ens, space, inside, 0.0))
              .epsilon(1e-10));
  }
}

TEST_CASE("shrinking the box never raises the bound") {
  FeatureSpace space = unit_cube(2);
  Rng rng = make_rng(479);
  PosteriorEnsemble ens = small_ensemble(space, 2, 4, 15, rng);
  for (int trial = 0; trial < 50; ++trial) {
    Box outer = full_box(space);
    outer.axes[0].lo = uniform_real(rng, 0.0, 0.3);
    outer.axes[0].hi = uniform_real(rng, 0.7, 1.0);
    Box inner = outer;
    inner.axes[0].lo = uniform_real(rng, outer.axes[0].lo, 0.5);
    inner.axes[0].hi = uniform_real(rng, 0.5, outer.axes[0].hi);
    inner.axes[1].hi = 0.6;
    CHECK(ucb_upper_bound(ens, space, inner, 1.96) <=
          ucb_upper_bound(ens, space, outer, 1.96) + 1e-10);
  }
}

TEST_CASE("the acquisition is constant on every partition cell") {
  FeatureSpace space = mixed_space();
  Rng rng = make_rng(487);
  PosteriorEnsemble ens = small_ensemble(space, 2, 3, 10, rng);
  std::vector<Box> cells = partition_cells(ens, space);
  REQUIRE(!cells.empty());
  for (const Box& cell : cells) {
    double ref = integrated_ucb(ens, space,
                                sample_uniform_in_box(space, cell, rng), 1.5);
    for (int probe = 0; probe < 4; ++probe) {
      Point x = sample_uniform_in_box(space, cell, rng);
      CHECK(integrated_ucb(ens, space, x, 1.5) ==
            doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("crossing splits refine into a product partition") {
  FeatureSpace space = unit_cube(2);
  Forest forest;
  forest.trees.push_back(grow_at(Tree::single_leaf(), 0, numeric_rule(0, 0.5)));
  forest.trees.push_back(grow_at(Tree::single_leaf(), 0, numeric_rule(1, 0.5)));

  Dataset data;
  data.X = {Point{0.2, 0.2}, Point{0.8, 0.8}};
  data.y_raw = {0.0, 1.0};
  data.y = {-1.0, 1.0};
  PosteriorEnsemble ens;
  ens.states.push_back(make_gp_state(forest, 0.1, data));

  CHECK(partition_cells(ens, space).size() == 4);
  AcqResult res = exhaustive_oracle(ens, space, 1.0);
  CHECK(res.nodes_explored == 4);

  Forest one;
  one.trees.push_back(forest.trees[0]);
  PosteriorEnsemble single;
  single.states.push_back(make_gp_state(one, 0.1, data));
  CHECK(partition_cells(single, space).size() == 2);
  CHECK(exhaustive_oracle(single, space, 1.0).nodes_explored == 2);
}

TEST_CASE("a stump ensemble is solved at the root") {
  FeatureSpace space = unit_cube(2);
  Rng rng = make_rng(491);
  PosteriorEnsemble ens = stump_ensemble(space, 2, rng);
  AcqConfig config;
  AcqResult res = maximize_acquisition(ens, space, config, rng);
  CHECK(res.status == AcqStatus::OptimalWithinGap);
  CHECK(res.nodes_explored == 1);
  CHECK(res.proven_gap == doctest::Approx(0.0));
  Point probe = sample_uniform(space, 1, rng)[0];
  CHECK(res.value == doctest::Approx(integrated_ucb(ens, space, probe, 1.96))
                         .epsilon(1e-12));
  CHECK_NOTHROW(validate_point(space, res.x_best));
}

TEST_CASE("branch and bound at zero gap matches exhaustive enumeration") {
  Rng rng = make_rng(499);
  for (int trial = 0; trial < 20; ++trial) {
    FeatureSpace space = trial % 2 == 0 ? unit_cube(2) : mixed_space();
    PosteriorEnsemble ens = small_ensemble(space, 2, 3, 10, rng);

    AcqConfig config;
    config.rel_gap = 0.0;
    AcqResult bnb = maximize_acquisition(ens, space, config, rng);
    AcqResult oracle = exhaustive_oracle(ens, space, config.kappa);

    CHECK(bnb.status == AcqStatus::OptimalWithinGap);
    CHECK(bnb.value == doctest::Approx(oracle.value).epsilon(1e-9));
    CHECK(bnb.value ==
          doctest::Approx(integrated_ucb(ens, space, bnb.x_best, config.kappa))
              .epsilon(1e-12));
    CHECK_NOTHROW(validate_point(space, bnb.x_best));
  }
}

TEST_CASE("the default gap still lands within its certificate of the optimum") {
  Rng rng = make_rng(503);
  for (int trial = 0; trial < 10; ++trial) {
    FeatureSpace space = unit_cube(2);
    PosteriorEnsemble ens = small_ensemble(space, 2, 4, 15, rng, 3);

    AcqConfig config;  // rel_gap 0.10
    AcqResult res = maximize_acquisition(ens, space, config, rng);
    AcqResult oracle = exhaustive_oracle(ens, space, config.kappa);

    CHECK(res.value <= oracle.value + 1e-9);
    CHECK(res.value >=
          oracle.value -
              config.rel_gap * std::max(std::abs(res.value), 1e-6) - 1e-9);
    CHECK(res.proven_gap <= config.rel_gap + 1e-12);
  }
}

TEST_CASE("branch and bound dominates random search") {
  Rng rng = make_rng(509);
  FeatureSpace space = mixed_space();
  PosteriorEnsemble ens = small_ensemble(space, 3, 4, 15, rng);

  AcqConfig config;
  config.rel_gap = 0.0;
  AcqResult bnb = maximize_acquisition(ens, space, config, rng);
  Rng rs_rng = make_rng(510);
  AcqResult rs = random_search(ens, space, 2000, config.kappa, rs_rng);
  CHECK(bnb.value >= rs.value - 1e-12);
}

TEST_CASE("random search reports an uncertified incumbent") {
  FeatureSpace space = unit_cube(2);
  Rng rng = make_rng(521);
  PosteriorEnsemble ens = small_ensemble(space, 2, 3, 12, rng);

  Rng rs1 = make_rng(522);
  AcqResult one = random_search(ens, space, 1, 1.96, rs1);
  CHECK(one.nodes_explored == 1);
  CHECK(std::isinf(one.proven_gap));
  CHECK(one.value ==
        doctest::Approx(integrated_ucb(ens, space, one.x_best, 1.96)));
  CHECK_NOTHROW(validate_point(space, one.x_best));

  // identical streams make the candidate sets nested, so more samples can
  // only improve the incumbent
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng small = make_rng(seed, 3);
    Rng large = make_rng(seed, 3);
    double v5 = random_search(ens, space, 5, 1.96, small).value;
    double v50 = random_search(ens, space, 50, 1.96, large).value;
    CHECK(v50 >= v5 - 1e-15);
  }

  AcqResult oracle = exhaustive_oracle(ens, space, 1.96);
  Rng rs2 = make_rng(523);
  CHECK(random_search(ens, space, 500, 1.96, rs2).value <=
        oracle.value + 1e-9);
}

TEST_CASE("the node guard halts expansion with a valid incumbent") {
  FeatureSpace space = unit_cube(2);
  Rng rng = make_rng(541);
  PosteriorEnsemble ens = small_ensemble(space, 3, 5, 20, rng, 3);
  AcqConfig config;
  config.rel_gap = 0.0;

  AcqResult full = maximize_acquisition(ens, space, config, rng);
  if (full.nodes_explored > 1) {
    AcqConfig capped = config;
    capped.node_limit = 1;
    AcqResult res = maximize_acquisition(ens, space, capped, rng);
    CHECK(res.status == AcqStatus::NodeLimit);
    CHECK(res.nodes_explored == 1);
    CHECK(res.value ==
          doctest::Approx(
              integrated_ucb(ens, space, res.x_best, config.kappa)));
    CHECK(res.value <= full.value + 1e-9);
    CHECK_NOTHROW(validate_point(space, res.x_best));
  }
}

TEST_CASE("reported wall time and node counts are sane") {
  FeatureSpace space = unit_cube(2);
  Rng rng = make_rng(547);
  PosteriorEnsemble ens = small_ensemble(space, 2, 4, 12, rng);
  AcqConfig config;
  AcqResult res = maximize_acquisition(ens, space, config, rng);
  CHECK(res.nodes_explored >= 1);
  CHECK(res.wall_time_s >= 0.0);
  CHECK(res.wall_time_s < config.time_limit_s);
}

}  // TEST_SUITE
