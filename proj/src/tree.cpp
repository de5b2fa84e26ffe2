#include "bark/tree.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace bark {

Tree Tree::single_leaf() {
  Tree t;
  t.nodes.resize(1);
  t.nodes[0].leaf_id = 0;
  t.n_leaves = 1;
  return t;
}

static void renumber_rec(Tree& t, int idx, int depth, int& next_leaf_id) {
  TreeNode& n = t.nodes[idx];
  n.depth = depth;
  if (n.is_leaf()) {
    n.leaf_id = next_leaf_id++;
    return;
  }
  n.leaf_id = -1;
  renumber_rec(t, n.left, depth + 1, next_leaf_id);
  renumber_rec(t, n.right, depth + 1, next_leaf_id);
}

void renumber_leaves(Tree& tree) {
  int next = 0;
  renumber_rec(tree, 0, 0, next);
  tree.n_leaves = next;
}

int route_to_leaf(const Tree& tree, const Point& x) {
  int idx = 0;
  while (!tree.nodes[idx].is_leaf()) {
    const TreeNode& n = tree.nodes[idx];
    idx = n.rule.routes_left(x[n.rule.feature]) ? n.left : n.right;
  }
  return idx;
}

int leaf_of(const Tree& tree, const Point& x) {
  return tree.nodes[route_to_leaf(tree, x)].leaf_id;
}

std::vector<double> leaf_vector(const Tree& tree, const Point& x) {
  std::vector<double> phi(tree.n_leaves, 0.0);
  phi[leaf_of(tree, x)] = 1.0;
  return phi;
}

NodeCounts node_counts(const Tree& tree) {
  NodeCounts c;
  c.w0 = tree.n_leaves;
  for (const TreeNode& n : tree.nodes)
    if (!n.is_leaf() && tree.nodes[n.left].is_leaf() && tree.nodes[n.right].is_leaf())
      ++c.w1;
  return c;
}

int tree_depth(const Tree& tree) {
  int d = 0;
  for (const TreeNode& n : tree.nodes) d = std::max(d, n.depth);
  return d;
}

static void collect_rec(const Tree& t, int idx, bool leaves, std::vector<int>& out) {
  const TreeNode& n = t.nodes[idx];
  if (n.is_leaf()) {
    if (leaves) out.push_back(idx);
    return;
  }
  if (!leaves && t.nodes[n.left].is_leaf() && t.nodes[n.right].is_leaf())
    out.push_back(idx);
  collect_rec(t, n.left, leaves, out);
  collect_rec(t, n.right, leaves, out);
}

std::vector<int> leaf_node_indices(const Tree& tree) {
  std::vector<int> out;
  collect_rec(tree, 0, true, out);
  return out;
}

std::vector<int> singly_internal_indices(const Tree& tree) {
  std::vector<int> out;
  collect_rec(tree, 0, false, out);
  return out;
}

// Child subdomains induced by a rule on the parent's axis.
static void shrink_axis(const FeatureSpec& spec, const SplitRule& rule,
                        const AxisBox& parent, AxisBox& left, AxisBox& right) {
  left = parent;
  right = parent;
  switch (spec.kind) {
    case FeatureKind::Continuous:
      left.hi = rule.threshold;
      right.lo = rule.threshold;
      break;
    case FeatureKind::Integer:
      left.hi = std::floor(rule.threshold);
      right.lo = std::floor(rule.threshold) + 1.0;
      break;
    case FeatureKind::Categorical:
      left.cats = parent.cats & rule.left_cats;
      right.cats = parent.cats & ~rule.left_cats;
      break;
  }
}

static void boxes_rec(const FeatureSpace& space, const Tree& t, int idx,
                      const Box& box, std::vector<Box>& out) {
  out[idx] = box;
  const TreeNode& n = t.nodes[idx];
  if (n.is_leaf()) return;
  Box lb = box, rb = box;
  shrink_axis(space.features[n.rule.feature], n.rule, box.axes[n.rule.feature],
              lb.axes[n.rule.feature], rb.axes[n.rule.feature]);
  boxes_rec(space, t, n.left, lb, out);
  boxes_rec(space, t, n.right, rb, out);
}

std::vector<Box> all_node_boxes(const FeatureSpace& space, const Tree& tree) {
  std::vector<Box> out(tree.nodes.size());
  boxes_rec(space, tree, 0, full_box(space), out);
  return out;
}

Box node_box(const FeatureSpace& space, const Tree& tree, int node_index) {
  return all_node_boxes(space, tree)[node_index];
}

std::vector<Box> leaf_boxes(const FeatureSpace& space, const Tree& tree) {
  std::vector<Box> all = all_node_boxes(space, tree);
  std::vector<Box> out(tree.n_leaves);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i)
    if (tree.nodes[i].is_leaf()) out[tree.nodes[i].leaf_id] = std::move(all[i]);
  return out;
}

double split_probability(int depth, double alpha, double beta) {
  if (depth < 0 || alpha < 0.0 || alpha > 1.0 || beta < 0.0)
    throw std::invalid_argument("split_probability parameter out of range");
  return alpha * std::pow(1.0 + depth, -beta);
}

std::optional<SplitRule> sample_rule(const FeatureSpace& space, const Box& box,
                                     Rng& rng) {
  std::vector<int> splittable;
  for (int i = 0; i < space.dim(); ++i)
    if (axis_splittable(space.features[i], box.axes[i])) splittable.push_back(i);
  if (splittable.empty()) return std::nullopt;

  int f = splittable[uniform_int(rng, 0, static_cast<long long>(splittable.size()) - 1)];
  const FeatureSpec& spec = space.features[f];
  const AxisBox& a = box.axes[f];
  SplitRule rule;
  rule.feature = f;
  switch (spec.kind) {
    case FeatureKind::Continuous:
      do {
        rule.threshold = uniform_real(rng, a.lo, a.hi);
      } while (!(rule.threshold > a.lo && rule.threshold < a.hi));
      break;
    case FeatureKind::Integer: {
      // cuts at half-integers lo+0.5 .. hi-0.5
      long long cuts = static_cast<long long>(a.hi - a.lo);
      rule.threshold = a.lo + static_cast<double>(uniform_int(rng, 0, cuts - 1)) + 0.5;
      break;
    }
    case FeatureKind::Categorical: {
      rule.categorical = true;
      // uniform over nonempty proper subsets of the allowed categories
      do {
        rule.left_cats = 0;
        for (std::uint64_t rest = a.cats; rest != 0; rest &= rest - 1) {
          std::uint64_t bit = rest & ~(rest - 1);
          if (uniform01(rng) < 0.5) rule.left_cats |= bit;
        }
      } while (rule.left_cats == 0 || rule.left_cats == a.cats);
      break;
    }
  }
  return rule;
}

std::optional<SplitRule> UniformSplits::sample(const FeatureSpace& space,
                                               const Box& box, Rng& rng) const {
  return sample_rule(space, box, rng);
}

bool UniformSplits::splittable(const FeatureSpace& space, const Box& box) const {
  return box_splittable(space, box);
}

// Data points reaching the box, as sorted unique per-axis values.
static std::vector<double> inbox_values(const FeatureSpace& space,
                                        const std::vector<Point>& data,
                                        const Box& box, int feature) {
  std::set<double> vals;
  for (const Point& p : data)
    if (box_contains(space, box, p)) vals.insert(p[feature]);
  return {vals.begin(), vals.end()};
}

std::optional<SplitRule> DataSplits::sample(const FeatureSpace& space,
                                            const Box& box, Rng& rng) const {
  std::vector<int> eligible;
  std::vector<std::vector<double>> values(space.dim());
  for (int f = 0; f < space.dim(); ++f) {
    values[f] = inbox_values(space, *data_, box, f);
    if (values[f].size() >= 2) eligible.push_back(f);
  }
  if (eligible.empty()) return std::nullopt;

  int f = eligible[uniform_int(rng, 0, static_cast<long long>(eligible.size()) - 1)];
  const FeatureSpec& spec = space.features[f];
  SplitRule rule;
  rule.feature = f;
  if (spec.kind == FeatureKind::Categorical) {
    rule.categorical = true;
    std::uint64_t observed = 0;
    for (double v : values[f]) observed |= 1ull << static_cast<int>(v);
    do {
      rule.left_cats = 0;
      for (std::uint64_t rest = observed; rest != 0; rest &= rest - 1) {
        std::uint64_t bit = rest & ~(rest - 1);
        if (uniform01(rng) < 0.5) rule.left_cats |= bit;
      }
    } while (rule.left_cats == 0 || rule.left_cats == box.axes[f].cats);
  } else {
    // midpoint between adjacent observed values, so both children keep data
    long long gap = uniform_int(rng, 0, static_cast<long long>(values[f].size()) - 2);
    rule.threshold = 0.5 * (values[f][gap] + values[f][gap + 1]);
  }
  return rule;
}

bool DataSplits::splittable(const FeatureSpace& space, const Box& box) const {
  for (int f = 0; f < space.dim(); ++f)
    if (inbox_values(space, *data_, box, f).size() >= 2) return true;
  return false;
}

static void grow_rec(const FeatureSpace& space, double alpha, double beta,
                     Rng& rng, const SplitSource& splits, int max_depth,
                     Tree& t, int idx, const Box& box, int depth) {
  if (depth >= max_depth || !splits.splittable(space, box)) return;
  if (uniform01(rng) >= split_probability(depth, alpha, beta)) return;
  std::optional<SplitRule> rule = splits.sample(space, box, rng);
  if (!rule) return;

  t.nodes[idx].rule = *rule;
  t.nodes[idx].left = static_cast<int>(t.nodes.size());
  t.nodes[idx].right = t.nodes[idx].left + 1;
  t.nodes.emplace_back();
  t.nodes.emplace_back();
  Box lb = box, rb = box;
  shrink_axis(space.features[rule->feature], *rule, box.axes[rule->feature],
              lb.axes[rule->feature], rb.axes[rule->feature]);
  grow_rec(space, alpha, beta, rng, splits, max_depth, t, t.nodes[idx].left, lb, depth + 1);
  grow_rec(space, alpha, beta, rng, splits, max_depth, t, t.nodes[idx].right, rb, depth + 1);
}

Tree sample_tree_prior(const FeatureSpace& space, double alpha, double beta,
                       Rng& rng, const SplitSource& splits, int max_depth) {
  Tree t;
  t.nodes.resize(1);
  grow_rec(space, alpha, beta, rng, splits, max_depth, t, 0, full_box(space), 0);
  renumber_leaves(t);
  return t;
}

Tree sample_tree_prior(const FeatureSpace& space, double alpha, double beta,
                       Rng& rng, int max_depth) {
  UniformSplits u;
  return sample_tree_prior(space, alpha, beta, rng, u, max_depth);
}

Forest sample_forest_prior(const FeatureSpace& space, int m, double alpha,
                           double beta, Rng& rng, const SplitSource& splits,
                           int max_depth) {
  Forest f;
  f.trees.reserve(m);
  for (int t = 0; t < m; ++t)
    f.trees.push_back(sample_tree_prior(space, alpha, beta, rng, splits, max_depth));
  return f;
}

static int copy_rec(const std::vector<TreeNode>& src, int idx,
                    std::vector<TreeNode>& out) {
  int my = static_cast<int>(out.size());
  out.push_back(src[idx]);
  if (src[idx].left >= 0) {
    int l = copy_rec(src, src[idx].left, out);
    int r = copy_rec(src, src[idx].right, out);
    out[my].left = l;
    out[my].right = r;
  }
  return my;
}

// Rebuilds the node vector in preorder (drops unreachable nodes).
static Tree compact(const Tree& t) {
  Tree out;
  out.nodes.reserve(t.nodes.size());
  copy_rec(t.nodes, 0, out.nodes);
  renumber_leaves(out);
  return out;
}

Tree grow_at(const Tree& tree, int leaf_node_index, const SplitRule& rule) {
  if (!tree.nodes[leaf_node_index].is_leaf())
    throw std::invalid_argument("grow_at target is not a leaf");
  Tree t = tree;
  TreeNode& n = t.nodes[leaf_node_index];
  n.rule = rule;
  n.left = static_cast<int>(t.nodes.size());
  n.right = n.left + 1;
  TreeNode child;
  child.depth = n.depth + 1;
  t.nodes.push_back(child);
  t.nodes.push_back(child);
  return compact(t);
}

Tree prune_at(const Tree& tree, int singly_internal_index) {
  const TreeNode& n = tree.nodes[singly_internal_index];
  if (n.is_leaf() || !tree.nodes[n.left].is_leaf() || !tree.nodes[n.right].is_leaf())
    throw std::invalid_argument("prune_at target is not singly-internal");
  Tree t = tree;
  t.nodes[singly_internal_index].left = -1;
  t.nodes[singly_internal_index].right = -1;
  return compact(t);
}

Tree change_rule_at(const Tree& tree, int singly_internal_index,
                    const SplitRule& rule) {
  const TreeNode& n = tree.nodes[singly_internal_index];
  if (n.is_leaf() || !tree.nodes[n.left].is_leaf() || !tree.nodes[n.right].is_leaf())
    throw std::invalid_argument("change_rule_at target is not singly-internal");
  Tree t = tree;
  t.nodes[singly_internal_index].rule = rule;
  return compact(t);
}

static bool equal_rec(const Tree& a, int ia, const Tree& b, int ib) {
  const TreeNode& na = a.nodes[ia];
  const TreeNode& nb = b.nodes[ib];
  if (na.is_leaf() != nb.is_leaf()) return false;
  if (na.is_leaf()) return true;
  if (na.rule.feature != nb.rule.feature ||
      na.rule.categorical != nb.rule.categorical ||
      na.rule.threshold != nb.rule.threshold ||
      na.rule.left_cats != nb.rule.left_cats)
    return false;
  return equal_rec(a, na.left, b, nb.left) && equal_rec(a, na.right, b, nb.right);
}

bool trees_equal(const Tree& a, const Tree& b) { return equal_rec(a, 0, b, 0); }

}  // namespace bark
