#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bark/rng.hpp"

namespace bark {

enum class FeatureKind { Continuous, Integer, Categorical };

// One coordinate of the search space: a continuous interval, an inclusive
// integer range, or a finite set of categories addressed by index.
struct FeatureSpec {
  FeatureKind kind = FeatureKind::Continuous;
  double lo = 0.0, hi = 0.0;  // Continuous / Integer bounds
  int n_categories = 0;       // Categorical only

  static FeatureSpec continuous(double lo, double hi);
  static FeatureSpec integer(long long lo, long long hi);
  static FeatureSpec categorical(int n_categories);
};

struct FeatureSpace {
  std::vector<FeatureSpec> features;

  FeatureSpace() = default;
  explicit FeatureSpace(std::vector<FeatureSpec> f);
  int dim() const { return static_cast<int>(features.size()); }
};

// Mixed point. Integer and category values are stored as exact small doubles;
// the interpretation lives in the FeatureSpace (no one-hot encoding anywhere).
using Point = std::vector<double>;

// Training data plus the output standardization applied before fitting.
struct Dataset {
  std::vector<Point> X;
  std::vector<double> y_raw;
  double y_mean = 0.0;
  double y_std = 1.0;
  std::vector<double> y;  // (y_raw - y_mean) / y_std

  std::size_t size() const { return X.size(); }
};

// Per-feature restriction of the domain. Numeric kinds use the closed
// interval [lo, hi]; categorical kinds use a bitmask of allowed indices
// (which caps categories per feature at 64).
struct AxisBox {
  double lo = 0.0, hi = 0.0;
  std::uint64_t cats = 0;
};

// Axis-aligned subdomain; axes align with the FeatureSpace order.
struct Box {
  std::vector<AxisBox> axes;
};

std::uint64_t full_category_mask(int n_categories);
int category_count(std::uint64_t cats);
int lowest_category(std::uint64_t cats);

// Throws std::invalid_argument when x has the wrong arity, a coordinate out
// of range, or a non-integral value on an integer/categorical feature.
void validate_point(const FeatureSpace& space, const Point& x);
bool point_in_domain(const FeatureSpace& space, const Point& x);

// Output standardization with the population convention (divisor n). A
// single observation or zero-variance outputs degenerate to y_std = 1 and an
// all-zero standardized vector.
Dataset standardize(std::vector<Point> X, std::vector<double> y_raw);
double unstandardize(const Dataset& d, double y_standardized);

Box full_box(const FeatureSpace& space);
bool box_contains(const FeatureSpace& space, const Box& box, const Point& x);

// True when the axis admits at least one split: a nondegenerate continuous
// interval, an integer range with >= 2 values, or >= 2 allowed categories.
bool axis_splittable(const FeatureSpec& spec, const AxisBox& axis);
bool box_splittable(const FeatureSpace& space, const Box& box);

// Positive-measure overlap test used by leaf reachability. Continuous axes
// require strictly positive intersection width, except that a degenerate
// (point) query interval falls back to closed containment; integer and
// categorical axes are exact set logic.
bool axis_reachable(const FeatureSpec& spec, const AxisBox& leaf_axis,
                    const AxisBox& query);

// Intersection with the same positive-measure semantics; returns false when
// the intersection is empty (or measure zero on a continuous axis).
bool axis_intersect(const FeatureSpec& spec, const AxisBox& a,
                    const AxisBox& b, AxisBox* out);
bool box_intersect(const FeatureSpace& space, const Box& a, const Box& b,
                   Box* out);

std::vector<Point> sample_uniform(const FeatureSpace& space, int n, Rng& rng);
Point sample_uniform_in_box(const FeatureSpace& space, const Box& box,
                            Rng& rng);

// Deterministic interior point: continuous midpoint, integer floor-midpoint,
// lowest allowed category.
Point representative_point(const FeatureSpace& space, const Box& box);

}  // namespace bark
