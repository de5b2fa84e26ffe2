#pragma once

#include <cstdint>

#include "bark/gp.hpp"
#include "bark/rng.hpp"

namespace bark {

enum class AcqOptimizer { BranchAndBound, Exhaustive, RandomSearch };

enum class AcqStatus { OptimalWithinGap, TimeLimit, NodeLimit };

struct AcqConfig {
  double kappa = 1.96;
  double rel_gap = 0.10;
  double time_limit_s = 100.0;
  // 0 disables the node guard; for the random-search optimizer this is the
  // sample count (default 10000 when left at 0).
  long long node_limit = 0;
  AcqOptimizer optimizer = AcqOptimizer::BranchAndBound;
};

struct AcqResult {
  Point x_best;
  double value = 0.0;
  double proven_gap = 0.0;  // (upper - value) / max(|value|, 1e-6); +inf if unknown
  long long nodes_explored = 0;
  double wall_time_s = 0.0;
  AcqStatus status = AcqStatus::OptimalWithinGap;
};

// (1/S) sum_s [mu_s(x) + kappa * sigma_s(x)] with the latent (noise-free)
// predictive standard deviation.
double integrated_ucb(const PosteriorEnsemble& ensemble,
                      const FeatureSpace& space, const Point& x, double kappa);

// Leaf ids of `tree` whose region meets `box` with positive measure on
// continuous axes (degenerate point axes of the query fall back to closed
// containment). Sorted ascending.
std::vector<int> leaf_reachability(const FeatureSpace& space, const Tree& tree,
                                   const Box& box);

// Admissible upper bound of integrated_ucb over `box`: per state, each tree
// contributes its best reachable leaf sum independently and the standard
// deviation is bounded by sigma0.
double ucb_upper_bound(const PosteriorEnsemble& ensemble,
                       const FeatureSpace& space, const Box& box, double kappa);

// Global maximization of the piecewise-constant acquisition. The default is
// best-first branch-and-bound over split resolution; `exhaustive` and
// `random_search` dispatch to the functions below.
AcqResult maximize_acquisition(const PosteriorEnsemble& ensemble,
                               const FeatureSpace& space,
                               const AcqConfig& config, Rng& rng);

// Common refinement of every tree's leaf partition across all states; the
// acquisition is constant on each returned cell. Throws when the cell count
// exceeds `cell_guard`.
std::vector<Box> partition_cells(const PosteriorEnsemble& ensemble,
                                 const FeatureSpace& space,
                                 std::size_t cell_guard = 1000000);

// Exact maximizer by evaluating one representative point per partition cell.
AcqResult exhaustive_oracle(const PosteriorEnsemble& ensemble,
                            const FeatureSpace& space, double kappa,
                            std::size_t cell_guard = 1000000);

// Best of n uniform samples; proven_gap is +inf (no certificate).
AcqResult random_search(const PosteriorEnsemble& ensemble,
                        const FeatureSpace& space, int n_samples, double kappa,
                        Rng& rng);

}  // namespace bark
