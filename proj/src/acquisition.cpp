#include "bark/acquisition.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace bark {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

bool axis_nonempty(const FeatureSpec& spec, const AxisBox& a, bool closed) {
  switch (spec.kind) {
    case FeatureKind::Continuous: return closed ? a.lo <= a.hi : a.lo < a.hi;
    case FeatureKind::Integer: return a.lo <= a.hi;
    case FeatureKind::Categorical: return a.cats != 0;
  }
  return false;
}

bool shrink_left_axis(const FeatureSpec& spec, const SplitRule& r, AxisBox& a,
                      bool closed) {
  if (spec.kind == FeatureKind::Categorical) {
    a.cats &= r.left_cats;
  } else if (spec.kind == FeatureKind::Integer) {
    a.hi = std::min(a.hi, std::floor(r.threshold));
  } else {
    a.hi = std::min(a.hi, r.threshold);
  }
  return axis_nonempty(spec, a, closed);
}

bool shrink_right_axis(const FeatureSpec& spec, const SplitRule& r, AxisBox& a,
                       bool closed) {
  if (spec.kind == FeatureKind::Categorical) {
    a.cats &= ~r.left_cats;
  } else if (spec.kind == FeatureKind::Integer) {
    a.lo = std::max(a.lo, std::floor(r.threshold) + 1.0);
  } else {
    a.lo = std::max(a.lo, r.threshold);
  }
  return axis_nonempty(spec, a, closed);
}

// True when branching `box` on `r` yields two boxes of positive measure, so
// the split makes progress (and never recreates the parent box).
bool rule_strictly_splits(const FeatureSpec& spec, const SplitRule& r,
                          const AxisBox& a) {
  switch (spec.kind) {
    case FeatureKind::Continuous:
      return a.lo < r.threshold && r.threshold < a.hi;
    case FeatureKind::Integer: {
      double cut = std::floor(r.threshold);
      return a.lo <= cut && cut + 1.0 <= a.hi;
    }
    case FeatureKind::Categorical: {
      std::uint64_t left = a.cats & r.left_cats;
      return left != 0 && left != a.cats;
    }
  }
  return false;
}

std::vector<char> closed_axis_flags(const FeatureSpace& space, const Box& box) {
  std::vector<char> closed(space.features.size(), 0);
  for (std::size_t f = 0; f < space.features.size(); ++f)
    if (space.features[f].kind == FeatureKind::Continuous &&
        box.axes[f].lo == box.axes[f].hi)
      closed[f] = 1;
  return closed;
}

void collect_reachable(const FeatureSpace& space, const Tree& tree, int idx,
                       Box& box, const std::vector<char>& closed,
                       std::vector<int>& out) {
  const TreeNode& n = tree.nodes[idx];
  if (n.is_leaf()) {
    out.push_back(n.leaf_id);
    return;
  }
  const FeatureSpec& spec = space.features[n.rule.feature];
  const AxisBox saved = box.axes[n.rule.feature];
  AxisBox left = saved, right = saved;
  if (shrink_left_axis(spec, n.rule, left, closed[n.rule.feature])) {
    box.axes[n.rule.feature] = left;
    collect_reachable(space, tree, n.left, box, closed, out);
  }
  if (shrink_right_axis(spec, n.rule, right, closed[n.rule.feature])) {
    box.axes[n.rule.feature] = right;
    collect_reachable(space, tree, n.right, box, closed, out);
  }
  box.axes[n.rule.feature] = saved;
}

// Per-tree descent used by the branch-and-bound: the best reachable leaf sum
// and the shallowest node whose rule strictly splits the box.
struct TreeScan {
  double max_c = -kInf;
  int branch_node = -1;
  int branch_depth = std::numeric_limits<int>::max();
};

void scan_tree(const FeatureSpace& space, const Tree& tree, int idx,
               const std::vector<double>& c, Box& box,
               const std::vector<char>& closed, TreeScan& out) {
  const TreeNode& n = tree.nodes[idx];
  if (n.is_leaf()) {
    out.max_c = std::max(out.max_c, c[n.leaf_id]);
    return;
  }
  const FeatureSpec& spec = space.features[n.rule.feature];
  const AxisBox saved = box.axes[n.rule.feature];
  AxisBox left = saved, right = saved;
  bool lok = shrink_left_axis(spec, n.rule, left, closed[n.rule.feature]);
  bool rok = shrink_right_axis(spec, n.rule, right, closed[n.rule.feature]);
  if (lok && rok && rule_strictly_splits(spec, n.rule, saved) &&
      n.depth < out.branch_depth) {
    out.branch_depth = n.depth;
    out.branch_node = idx;
  }
  if (lok) {
    box.axes[n.rule.feature] = left;
    scan_tree(space, tree, n.left, c, box, closed, out);
  }
  if (rok) {
    box.axes[n.rule.feature] = right;
    scan_tree(space, tree, n.right, c, box, closed, out);
  }
  box.axes[n.rule.feature] = saved;
}

// alpha summed per leaf: the per-tree mean decomposition
// mu(x) = (sigma0^2/m) * sum_t c_t(leaf_t(x)).
std::vector<std::vector<double>> leaf_alpha_sums(const GpState& s) {
  std::vector<std::vector<double>> out(s.forest.trees.size());
  for (std::size_t t = 0; t < s.forest.trees.size(); ++t) {
    out[t].assign(s.forest.trees[t].n_leaves, 0.0);
    for (std::size_t i = 0; i < s.leaf_ix[t].size(); ++i)
      out[t][s.leaf_ix[t][i]] += s.alpha[static_cast<Eigen::Index>(i)];
  }
  return out;
}

bool lex_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void require_fitted(const PosteriorEnsemble& ens, const FeatureSpace& space) {
  if (ens.states.empty())
    throw std::invalid_argument("acquisition needs a nonempty ensemble");
  if (space.dim() == 0) throw std::invalid_argument("empty domain");
}

struct FrontierNode {
  double bound = 0.0;
  long long seq = 0;
  bool resolved = false;
  SplitRule branch;
  Box box;
};

struct FrontierOrder {
  bool operator()(const FrontierNode& a, const FrontierNode& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.seq > b.seq;  // FIFO among equal bounds
  }
};

}  // namespace

double integrated_ucb(const PosteriorEnsemble& ensemble,
                      const FeatureSpace& space, const Point& x, double kappa) {
  require_fitted(ensemble, space);
  validate_point(space, x);
  double acc = 0.0;
  for (const GpState& s : ensemble.states) {
    PredictiveGaussian pg = predict(s, x);
    acc += pg.mean + kappa * std::sqrt(std::max(0.0, pg.var));
  }
  return acc / ensemble.size();
}

std::vector<int> leaf_reachability(const FeatureSpace& space, const Tree& tree,
                                   const Box& box) {
  if (static_cast<int>(box.axes.size()) != space.dim())
    throw std::invalid_argument("box arity mismatch");
  std::vector<char> closed = closed_axis_flags(space, box);
  Box scratch = box;
  std::vector<int> out;
  collect_reachable(space, tree, 0, scratch, closed, out);
  std::sort(out.begin(), out.end());
  return out;
}

double ucb_upper_bound(const PosteriorEnsemble& ensemble,
                       const FeatureSpace& space, const Box& box,
                       double kappa) {
  require_fitted(ensemble, space);
  if (static_cast<int>(box.axes.size()) != space.dim())
    throw std::invalid_argument("box arity mismatch");
  std::vector<char> closed = closed_axis_flags(space, box);
  double acc = 0.0;
  for (const GpState& s : ensemble.states) {
    std::vector<std::vector<double>> sums = leaf_alpha_sums(s);
    double mean_part = 0.0;
    Box scratch = box;
    for (std::size_t t = 0; t < s.forest.trees.size(); ++t) {
      TreeScan scan;
      scan_tree(space, s.forest.trees[t], 0, sums[t], scratch, closed, scan);
      mean_part += scan.max_c;
    }
    acc += s.sigma0_sq / s.forest.size() * mean_part +
           kappa * std::sqrt(s.sigma0_sq);
  }
  return acc / ensemble.size();
}

std::vector<Box> partition_cells(const PosteriorEnsemble& ensemble,
                                 const FeatureSpace& space,
                                 std::size_t cell_guard) {
  require_fitted(ensemble, space);
  std::vector<Box> cells{full_box(space)};
  for (const GpState& s : ensemble.states) {
    for (const Tree& tree : s.forest.trees) {
      if (tree.is_stump()) continue;  // refines nothing
      std::vector<Box> leaves = leaf_boxes(space, tree);
      std::vector<Box> next;
      for (const Box& cell : cells) {
        for (const Box& leaf : leaves) {
          Box inter;
          if (!box_intersect(space, cell, leaf, &inter)) continue;
          next.push_back(std::move(inter));
          if (next.size() > cell_guard)
            throw std::runtime_error("partition cell guard exceeded");
        }
      }
      cells = std::move(next);
    }
  }
  return cells;
}

AcqResult exhaustive_oracle(const PosteriorEnsemble& ensemble,
                            const FeatureSpace& space, double kappa,
                            std::size_t cell_guard) {
  auto start = std::chrono::steady_clock::now();
  std::vector<Box> cells = partition_cells(ensemble, space, cell_guard);
  AcqResult res;
  res.value = -kInf;
  for (const Box& cell : cells) {
    Point rep = representative_point(space, cell);
    double v = integrated_ucb(ensemble, space, rep, kappa);
    if (v > res.value || (v == res.value && lex_less(rep, res.x_best))) {
      res.value = v;
      res.x_best = std::move(rep);
    }
  }
  res.proven_gap = 0.0;
  res.nodes_explored = static_cast<long long>(cells.size());
  res.status = AcqStatus::OptimalWithinGap;
  res.wall_time_s = elapsed_seconds(start);
  return res;
}

AcqResult random_search(const PosteriorEnsemble& ensemble,
                        const FeatureSpace& space, int n_samples, double kappa,
                        Rng& rng) {
  require_fitted(ensemble, space);
  if (n_samples < 1) throw std::invalid_argument("random_search needs n >= 1");
  auto start = std::chrono::steady_clock::now();
  AcqResult res;
  res.value = -kInf;
  for (int i = 0; i < n_samples; ++i) {
    Point x = sample_uniform(space, 1, rng).front();
    double v = integrated_ucb(ensemble, space, x, kappa);
    if (v > res.value || (v == res.value && lex_less(x, res.x_best))) {
      res.value = v;
      res.x_best = std::move(x);
    }
  }
  res.proven_gap = kInf;  // no certificate
  res.nodes_explored = n_samples;
  res.status = AcqStatus::NodeLimit;
  res.wall_time_s = elapsed_seconds(start);
  return res;
}

namespace {

AcqResult maximize_branch_and_bound(const PosteriorEnsemble& ensemble,
                                    const FeatureSpace& space,
                                    const AcqConfig& config) {
  auto start = std::chrono::steady_clock::now();

  std::vector<std::vector<std::vector<double>>> sums;
  sums.reserve(ensemble.states.size());
  for (const GpState& s : ensemble.states) sums.push_back(leaf_alpha_sums(s));

  AcqResult res;
  res.value = -kInf;
  auto consider = [&](Point x, double v) {
    if (v > res.value || (v == res.value && lex_less(x, res.x_best))) {
      res.value = v;
      res.x_best = std::move(x);
    }
  };

  // Bound, incumbent candidate, and branch choice for one box. The branch is
  // the shallowest strict split of the (state, tree) pair with the largest
  // bound contribution among pairs that still have one.
  auto evaluate = [&](const Box& box, FrontierNode& node) {
    std::vector<char> closed = closed_axis_flags(space, box);
    double acc = 0.0;
    double best_contrib = -kInf;
    node.resolved = true;
    for (std::size_t si = 0; si < ensemble.states.size(); ++si) {
      const GpState& s = ensemble.states[si];
      double factor = s.sigma0_sq / s.forest.size();
      double mean_part = 0.0;
      Box scratch = box;
      for (std::size_t t = 0; t < s.forest.trees.size(); ++t) {
        TreeScan scan;
        scan_tree(space, s.forest.trees[t], 0, sums[si][t], scratch, closed,
                  scan);
        mean_part += scan.max_c;
        if (scan.branch_node >= 0) {
          node.resolved = false;
          double contrib = factor * scan.max_c;
          if (contrib > best_contrib) {
            best_contrib = contrib;
            node.branch = s.forest.trees[t].nodes[scan.branch_node].rule;
          }
        }
      }
      acc += factor * mean_part + config.kappa * std::sqrt(s.sigma0_sq);
    }
    Point rep = representative_point(space, box);
    double v = integrated_ucb(ensemble, space, rep, config.kappa);
    consider(std::move(rep), v);
    node.bound = node.resolved ? v : acc / ensemble.size();
    node.box = box;
  };

  std::priority_queue<FrontierNode, std::vector<FrontierNode>, FrontierOrder> q;
  long long seq = 0;

  FrontierNode root;
  evaluate(full_box(space), root);
  root.seq = seq++;
  q.push(std::move(root));

  res.status = AcqStatus::OptimalWithinGap;
  res.proven_gap = 0.0;
  while (!q.empty()) {
    FrontierNode node = q.top();
    q.pop();
    ++res.nodes_explored;

    double scale = std::max(std::abs(res.value), 1e-6);
    double gap = (node.bound - res.value) / scale;
    if (gap <= config.rel_gap) {
      res.status = AcqStatus::OptimalWithinGap;
      res.proven_gap = std::max(0.0, gap);
      break;
    }
    if (elapsed_seconds(start) > config.time_limit_s) {
      res.status = AcqStatus::TimeLimit;
      res.proven_gap = gap;
      break;
    }
    if (config.node_limit > 0 && res.nodes_explored >= config.node_limit) {
      res.status = AcqStatus::NodeLimit;
      res.proven_gap = gap;
      break;
    }
    if (node.resolved) continue;  // bound equals its exact value

    const FeatureSpec& spec = space.features[node.branch.feature];
    Box left = node.box, right = node.box;
    shrink_left_axis(spec, node.branch, left.axes[node.branch.feature], false);
    shrink_right_axis(spec, node.branch, right.axes[node.branch.feature],
                      false);
    for (Box* child : {&left, &right}) {
      FrontierNode next;
      evaluate(*child, next);
      next.seq = seq++;
      q.push(std::move(next));
    }
  }
  res.wall_time_s = elapsed_seconds(start);
  return res;
}

}  // namespace

AcqResult maximize_acquisition(const PosteriorEnsemble& ensemble,
                               const FeatureSpace& space,
                               const AcqConfig& config, Rng& rng) {
  require_fitted(ensemble, space);
  if (config.kappa < 0.0)
    throw std::invalid_argument("kappa must be nonnegative");
  if (!(config.rel_gap >= 0.0 && config.rel_gap < 1.0))
    throw std::invalid_argument("rel_gap must lie in [0,1)");
  switch (config.optimizer) {
    case AcqOptimizer::Exhaustive:
      return exhaustive_oracle(ensemble, space, config.kappa);
    case AcqOptimizer::RandomSearch: {
      int n = config.node_limit > 0 ? static_cast<int>(config.node_limit)
                                    : 10000;
      return random_search(ensemble, space, n, config.kappa, rng);
    }
    case AcqOptimizer::BranchAndBound: break;
  }
  return maximize_branch_and_bound(ensemble, space, config);
}

}  // namespace bark
