#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bark/feature_space.hpp"

namespace bark {

// Axis-aligned split. Numeric features route left iff x_f <= threshold;
// categorical features route left iff the category index is in left_cats.
struct SplitRule {
  int feature = -1;
  bool categorical = false;
  double threshold = 0.0;
  std::uint64_t left_cats = 0;

  bool routes_left(double value) const {
    if (categorical) return ((left_cats >> static_cast<int>(value)) & 1ull) != 0;
    return value <= threshold;
  }
};

struct TreeNode {
  SplitRule rule;  // decision nodes only
  int left = -1, right = -1;
  int depth = 0;
  int leaf_id = -1;  // canonical left-to-right id, leaves only

  bool is_leaf() const { return left < 0; }
};

// Binary decision tree over a FeatureSpace. Nodes live in a flat vector with
// the root at index 0. Trees are treated as immutable values; structural
// proposals build modified copies.
struct Tree {
  std::vector<TreeNode> nodes;
  int n_leaves = 0;

  static Tree single_leaf();
  bool is_stump() const { return nodes.size() == 1; }
  int decision_count() const { return static_cast<int>(nodes.size()) - n_leaves; }
};

struct Forest {
  std::vector<Tree> trees;
  int size() const { return static_cast<int>(trees.size()); }
};

// Leaf counts used by the grow/prune transition ratios: w0 = leaves,
// w1 = decision nodes whose children are both leaves (singly-internal).
struct NodeCounts {
  int w0 = 0;
  int w1 = 0;
};

// Assigns canonical leaf ids in left-to-right order and refreshes n_leaves.
void renumber_leaves(Tree& tree);

// Node index of the leaf containing x (routing from the root).
int route_to_leaf(const Tree& tree, const Point& x);
// Canonical leaf id of the leaf containing x.
int leaf_of(const Tree& tree, const Point& x);
// One-hot indicator over the tree's leaves.
std::vector<double> leaf_vector(const Tree& tree, const Point& x);

NodeCounts node_counts(const Tree& tree);
int tree_depth(const Tree& tree);

// Node indices of all leaves / singly-internal nodes, in DFS order.
std::vector<int> leaf_node_indices(const Tree& tree);
std::vector<int> singly_internal_indices(const Tree& tree);

// Subdomain reaching each node, derived by walking rules from the root.
std::vector<Box> all_node_boxes(const FeatureSpace& space, const Tree& tree);
Box node_box(const FeatureSpace& space, const Tree& tree, int node_index);
// Box of each leaf, indexed by canonical leaf id.
std::vector<Box> leaf_boxes(const FeatureSpace& space, const Tree& tree);

// Depth prior: probability alpha * (1 + depth)^-beta that a node splits.
double split_probability(int depth, double alpha, double beta);

// Where split rules come from. The default draws uniformly over the node's
// subdomain; the data-splits ablation draws from the observed data instead
// (BART's convention). Both are used for prior growth and for proposals, so
// the rule-probability cancellation in the MH ratios holds for either.
class SplitSource {
 public:
  virtual ~SplitSource() = default;
  virtual std::optional<SplitRule> sample(const FeatureSpace& space,
                                          const Box& box, Rng& rng) const = 0;
  virtual bool splittable(const FeatureSpace& space, const Box& box) const = 0;
};

class UniformSplits final : public SplitSource {
 public:
  std::optional<SplitRule> sample(const FeatureSpace& space, const Box& box,
                                  Rng& rng) const override;
  bool splittable(const FeatureSpace& space, const Box& box) const override;
};

// Numeric thresholds are drawn uniformly from midpoints of adjacent sorted
// unique in-box data values; categorical left-sets from observed categories.
class DataSplits final : public SplitSource {
 public:
  explicit DataSplits(const std::vector<Point>* data) : data_(data) {}
  std::optional<SplitRule> sample(const FeatureSpace& space, const Box& box,
                                  Rng& rng) const override;
  bool splittable(const FeatureSpace& space, const Box& box) const override;

 private:
  const std::vector<Point>* data_;
};

// Uniform-subspace rule sampler: feature uniform among splittable features,
// continuous threshold uniform on the axis interval, integer threshold
// uniform over half-integer cuts, categorical left-set uniform over nonempty
// proper subsets of the allowed categories. Returns nullopt when the box has
// no splittable feature.
std::optional<SplitRule> sample_rule(const FeatureSpace& space, const Box& box,
                                     Rng& rng);

inline constexpr int kMaxTreeDepth = 30;

// Grows a tree from the depth prior: a node at depth d becomes a decision
// node with probability alpha*(1+d)^-beta when its box is splittable (forced
// leaf otherwise), with rules drawn from `splits`.
Tree sample_tree_prior(const FeatureSpace& space, double alpha, double beta,
                       Rng& rng, const SplitSource& splits,
                       int max_depth = kMaxTreeDepth);
Tree sample_tree_prior(const FeatureSpace& space, double alpha, double beta,
                       Rng& rng, int max_depth = kMaxTreeDepth);

Forest sample_forest_prior(const FeatureSpace& space, int m, double alpha,
                           double beta, Rng& rng, const SplitSource& splits,
                           int max_depth = kMaxTreeDepth);

// Structural edits; each returns a fresh tree with canonical leaf ids.
Tree grow_at(const Tree& tree, int leaf_node_index, const SplitRule& rule);
Tree prune_at(const Tree& tree, int singly_internal_index);
Tree change_rule_at(const Tree& tree, int singly_internal_index,
                    const SplitRule& rule);

bool trees_equal(const Tree& a, const Tree& b);

}  // namespace bark
