#include "bark/feature_space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace bark {

FeatureSpec FeatureSpec::continuous(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("continuous feature needs lo < hi");
  FeatureSpec s;
  s.kind = FeatureKind::Continuous;
  s.lo = lo;
  s.hi = hi;
  return s;
}

FeatureSpec FeatureSpec::integer(long long lo, long long hi) {
  if (!(lo < hi)) throw std::invalid_argument("integer feature needs lo < hi");
  FeatureSpec s;
  s.kind = FeatureKind::Integer;
  s.lo = static_cast<double>(lo);
  s.hi = static_cast<double>(hi);
  return s;
}

FeatureSpec FeatureSpec::categorical(int n_categories) {
  if (n_categories < 2) throw std::invalid_argument("categorical feature needs >= 2 categories");
  if (n_categories > 64) throw std::invalid_argument("categorical feature capped at 64 categories");
  FeatureSpec s;
  s.kind = FeatureKind::Categorical;
  s.n_categories = n_categories;
  return s;
}

FeatureSpace::FeatureSpace(std::vector<FeatureSpec> f) : features(std::move(f)) {
  if (features.empty()) throw std::invalid_argument("feature space needs >= 1 feature");
}

std::uint64_t full_category_mask(int n_categories) {
  return n_categories >= 64 ? ~0ull : ((1ull << n_categories) - 1);
}

int category_count(std::uint64_t cats) { return std::popcount(cats); }

int lowest_category(std::uint64_t cats) {
  return cats == 0 ? -1 : std::countr_zero(cats);
}

static bool is_integral_value(double v) { return std::floor(v) == v && std::isfinite(v); }

void validate_point(const FeatureSpace& space, const Point& x) {
  if (static_cast<int>(x.size()) != space.dim())
    throw std::invalid_argument("point dimension mismatch");
  for (int i = 0; i < space.dim(); ++i) {
    const FeatureSpec& f = space.features[i];
    double v = x[i];
    switch (f.kind) {
      case FeatureKind::Continuous:
        if (!(v >= f.lo && v <= f.hi))
          throw std::invalid_argument("continuous coordinate " + std::to_string(i) + " out of bounds");
        break;
      case FeatureKind::Integer:
        if (!is_integral_value(v) || v < f.lo || v > f.hi)
          throw std::invalid_argument("integer coordinate " + std::to_string(i) + " out of bounds");
        break;
      case FeatureKind::Categorical:
        if (!is_integral_value(v) || v < 0 || v >= f.n_categories)
          throw std::invalid_argument("category index " + std::to_string(i) + " out of range");
        break;
    }
  }
}

bool point_in_domain(const FeatureSpace& space, const Point& x) {
  try {
    validate_point(space, x);
  } catch (const std::invalid_argument&) {
    return false;
  }
  return true;
}

Dataset standardize(std::vector<Point> X, std::vector<double> y_raw) {
  if (X.size() != y_raw.size()) throw std::invalid_argument("X/y size mismatch");
  if (y_raw.empty()) throw std::invalid_argument("standardize needs >= 1 observation");
  Dataset d;
  d.X = std::move(X);
  d.y_raw = std::move(y_raw);
  const std::size_t n = d.y_raw.size();

  double mean = 0.0;
  for (double v : d.y_raw) mean += v;
  mean /= static_cast<double>(n);

  auto [mn, mx] = std::minmax_element(d.y_raw.begin(), d.y_raw.end());
  if (*mn == *mx) {
    // constant outputs: fall back to a unit scale so the model degenerates
    // gracefully instead of dividing by ~0
    d.y_mean = *mn;
    d.y_std = 1.0;
    d.y.assign(n, 0.0);
    return d;
  }

  double var = 0.0;
  for (double v : d.y_raw) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);  // population convention
  d.y_mean = mean;
  d.y_std = std::sqrt(var);
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.y[i] = (d.y_raw[i] - mean) / d.y_std;
  return d;
}

double unstandardize(const Dataset& d, double y_standardized) {
  return y_standardized * d.y_std + d.y_mean;
}

Box full_box(const FeatureSpace& space) {
  Box b;
  b.axes.resize(space.dim());
  for (int i = 0; i < space.dim(); ++i) {
    const FeatureSpec& f = space.features[i];
    if (f.kind == FeatureKind::Categorical) {
      b.axes[i].cats = full_category_mask(f.n_categories);
    } else {
      b.axes[i].lo = f.lo;
      b.axes[i].hi = f.hi;
    }
  }
  return b;
}

bool box_contains(const FeatureSpace& space, const Box& box, const Point& x) {
  if (static_cast<int>(x.size()) != space.dim() ||
      box.axes.size() != x.size())
    throw std::invalid_argument("box_contains dimension mismatch");
  for (int i = 0; i < space.dim(); ++i) {
    const AxisBox& a = box.axes[i];
    if (space.features[i].kind == FeatureKind::Categorical) {
      int c = static_cast<int>(x[i]);
      if (((a.cats >> c) & 1ull) == 0) return false;
    } else {
      if (x[i] < a.lo || x[i] > a.hi) return false;
    }
  }
  return true;
}

bool axis_splittable(const FeatureSpec& spec, const AxisBox& axis) {
  switch (spec.kind) {
    case FeatureKind::Continuous:
      return axis.lo < axis.hi;
    case FeatureKind::Integer:
      return axis.hi - axis.lo >= 1.0;
    case FeatureKind::Categorical:
      return category_count(axis.cats) >= 2;
  }
  return false;
}

bool box_splittable(const FeatureSpace& space, const Box& box) {
  for (int i = 0; i < space.dim(); ++i)
    if (axis_splittable(space.features[i], box.axes[i])) return true;
  return false;
}

bool axis_reachable(const FeatureSpec& spec, const AxisBox& leaf_axis,
                    const AxisBox& query) {
  switch (spec.kind) {
    case FeatureKind::Continuous: {
      double lo = std::max(leaf_axis.lo, query.lo);
      double hi = std::min(leaf_axis.hi, query.hi);
      if (lo < hi) return true;
      // point query at a leaf boundary still reaches the leaf
      return lo == hi && query.lo == query.hi;
    }
    case FeatureKind::Integer:
      return std::max(leaf_axis.lo, query.lo) <= std::min(leaf_axis.hi, query.hi);
    case FeatureKind::Categorical:
      return (leaf_axis.cats & query.cats) != 0;
  }
  return false;
}

bool axis_intersect(const FeatureSpec& spec, const AxisBox& a,
                    const AxisBox& b, AxisBox* out) {
  AxisBox r;
  switch (spec.kind) {
    case FeatureKind::Continuous:
      r.lo = std::max(a.lo, b.lo);
      r.hi = std::min(a.hi, b.hi);
      if (!(r.lo < r.hi)) return false;
      break;
    case FeatureKind::Integer:
      r.lo = std::max(a.lo, b.lo);
      r.hi = std::min(a.hi, b.hi);
      if (r.lo > r.hi) return false;
      break;
    case FeatureKind::Categorical:
      r.cats = a.cats & b.cats;
      if (r.cats == 0) return false;
      break;
  }
  if (out) *out = r;
  return true;
}

bool box_intersect(const FeatureSpace& space, const Box& a, const Box& b,
                   Box* out) {
  Box r;
  r.axes.resize(space.dim());
  for (int i = 0; i < space.dim(); ++i)
    if (!axis_intersect(space.features[i], a.axes[i], b.axes[i], &r.axes[i]))
      return false;
  if (out) *out = std::move(r);
  return true;
}

std::vector<Point> sample_uniform(const FeatureSpace& space, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_uniform needs n >= 1");
  Box b = full_box(space);
  std::vector<Point> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(sample_uniform_in_box(space, b, rng));
  return out;
}

Point sample_uniform_in_box(const FeatureSpace& space, const Box& box, Rng& rng) {
  Point x(space.dim());
  for (int i = 0; i < space.dim(); ++i) {
    const FeatureSpec& f = space.features[i];
    const AxisBox& a = box.axes[i];
    switch (f.kind) {
      case FeatureKind::Continuous:
        x[i] = uniform_real(rng, a.lo, a.hi);
        break;
      case FeatureKind::Integer:
        x[i] = static_cast<double>(uniform_int(rng, static_cast<long long>(a.lo),
                                               static_cast<long long>(a.hi)));
        break;
      case FeatureKind::Categorical: {
        int k = category_count(a.cats);
        long long pick = uniform_int(rng, 0, k - 1);
        std::uint64_t cats = a.cats;
        while (pick-- > 0) cats &= cats - 1;  // drop lowest set bits
        x[i] = static_cast<double>(lowest_category(cats));
        break;
      }
    }
  }
  return x;
}

Point representative_point(const FeatureSpace& space, const Box& box) {
  Point x(space.dim());
  for (int i = 0; i < space.dim(); ++i) {
    const FeatureSpec& f = space.features[i];
    const AxisBox& a = box.axes[i];
    switch (f.kind) {
      case FeatureKind::Continuous:
        x[i] = 0.5 * (a.lo + a.hi);
        break;
      case FeatureKind::Integer:
        x[i] = a.lo + std::floor(0.5 * (a.hi - a.lo));
        break;
      case FeatureKind::Categorical:
        x[i] = static_cast<double>(lowest_category(a.cats));
        break;
    }
  }
  return x;
}

}  // namespace bark
