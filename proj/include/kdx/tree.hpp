#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kdx/point.hpp"
#include "kdx/selection.hpp"

// Construction of the two k-d tree variants:
//
//  * KdTree     - every node holds exactly one point; interior nodes also
//                 hold the splitting hyperplane through that point.
//  * BucketTree - interior nodes hold only a hyperplane; points live in the
//                 leaves, at most `b` per leaf.
//
// Both split on the dimension of largest spread at the median under the
// (coordinate, id) total order, so the tree built for a point set is unique
// and independent of input order.

namespace kdx {

inline constexpr std::uint32_t kNoNode = 0xFFFFFFFFu;
inline constexpr std::uint32_t kNoPlane = 0xFFFFFFFFu;

/// Axis-aligned splitting hyperplane {x | x[dim] = value}.
struct SplitPlane {
  std::uint32_t dim = 0;
  double value = 0.0;
};

/// One node of either tree variant, stored in a contiguous array with
/// integer child links. A node with split_dim == kNoPlane is a leaf.
/// [first_point, first_point + point_count) indexes the tree's point pool.
struct TreeNode {
  std::uint32_t split_dim = kNoPlane;
  double split_value = 0.0;
  std::uint32_t left = kNoNode;
  std::uint32_t right = kNoNode;
  std::uint32_t first_point = 0;
  std::uint32_t point_count = 0;

  bool is_leaf() const { return split_dim == kNoPlane; }
};

namespace detail {

/// Storage shared by both tree variants: nodes in build (pre-)order, point
/// coordinates row-major in a flat pool, ids parallel to it.
struct TreePool {
  std::size_t dim = 0;
  std::uint32_t root = kNoNode;
  std::uint32_t bucket_capacity = 0;  // 0 for the interior-point variant
  std::vector<TreeNode> nodes;
  std::vector<double> coords;  // point_count() * dim
  std::vector<std::uint32_t> ids;

  std::size_t point_count() const { return ids.size(); }
  std::span<const double> point_coords(std::uint32_t slot) const {
    return {coords.data() + static_cast<std::size_t>(slot) * dim, dim};
  }
  double coord(std::uint32_t slot, std::size_t d) const {
    return coords[static_cast<std::size_t>(slot) * dim + d];
  }
};

// Position comparator implementing the (coordinate, id) total order.
struct PositionLess {
  const std::vector<double>& coords;
  const std::vector<std::uint32_t>& ids;
  std::size_t dim;
  std::size_t axis;

  bool operator()(std::uint32_t a, std::uint32_t b) const {
    const double ca = coords[static_cast<std::size_t>(a) * dim + axis];
    const double cb = coords[static_cast<std::size_t>(b) * dim + axis];
    if (ca != cb) return ca < cb;
    return ids[a] < ids[b];
  }
};

class TreeBuilder {
 public:
  // bucket_capacity == 0 selects the interior-point variant.
  TreeBuilder(const PointSet& points, std::uint32_t bucket_capacity)
      : bucket_(bucket_capacity) {
    const std::size_t n = points.size();
    pool_.dim = points.dim();
    pool_.bucket_capacity = bucket_capacity;
    src_coords_.reserve(n * pool_.dim);
    src_ids_.reserve(n);
    for (const Point& p : points) {
      src_coords_.insert(src_coords_.end(), p.coords.begin(), p.coords.end());
      src_ids_.push_back(p.id);
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    pool_.nodes.reserve(n == 0 ? 0 : 2 * n);
    pool_.root = build_range(0, n);
    // Materialize the point pool in final order so that every node's point
    // range is a contiguous slice.
    pool_.coords.resize(n * pool_.dim);
    pool_.ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t src = order_[i];
      pool_.ids[i] = src_ids_[src];
      std::copy_n(src_coords_.begin() + src * pool_.dim, pool_.dim,
                  pool_.coords.begin() + i * pool_.dim);
    }
  }

  TreePool take() { return std::move(pool_); }

 private:
  std::uint32_t build_range(std::size_t offset, std::size_t count) {
    if (count == 0) return kNoNode;
    const auto index = static_cast<std::uint32_t>(pool_.nodes.size());
    pool_.nodes.emplace_back();

    const bool leaf = bucket_ == 0 ? count == 1 : count <= bucket_;
    if (leaf) {
      // Leaf contents are canonicalized by id so that equal point sets give
      // bit-identical trees regardless of input permutation.
      std::sort(order_.begin() + offset, order_.begin() + offset + count,
                [this](std::uint32_t a, std::uint32_t b) { return src_ids_[a] < src_ids_[b]; });
      TreeNode& node = pool_.nodes[index];
      node.first_point = static_cast<std::uint32_t>(offset);
      node.point_count = static_cast<std::uint32_t>(count);
      return index;
    }

    const std::size_t axis = spread_axis(offset, count);
    const std::size_t mid = median_rank(count) - 1;  // 0-based offset of the median
    PositionLess less{src_coords_, src_ids_, pool_.dim, axis};
    select_nth(order_.begin() + offset, order_.begin() + offset + mid,
               order_.begin() + offset + count, less);
    const std::uint32_t median_pos = order_[offset + mid];
    const double plane_value = src_coords_[static_cast<std::size_t>(median_pos) * pool_.dim + axis];

    {
      TreeNode& node = pool_.nodes[index];
      node.split_dim = static_cast<std::uint32_t>(axis);
      node.split_value = plane_value;
    }

    std::uint32_t left, right;
    if (bucket_ == 0) {
      // The median point lives in this node; children cover the strict
      // before/after ranges.
      pool_.nodes[index].first_point = static_cast<std::uint32_t>(offset + mid);
      pool_.nodes[index].point_count = 1;
      left = build_range(offset, mid);
      right = build_range(offset + mid + 1, count - mid - 1);
    } else {
      // Points only in leaves: the median goes to the left subset, which
      // then holds at most one point more than the right.
      left = build_range(offset, mid + 1);
      right = build_range(offset + mid + 1, count - mid - 1);
    }
    pool_.nodes[index].left = left;
    pool_.nodes[index].right = right;
    return index;
  }

  // Dimension of largest spread over the subset; ties to the lowest index.
  std::size_t spread_axis(std::size_t offset, std::size_t count) const {
    std::size_t best_axis = 0;
    double best_spread = -1.0;
    for (std::size_t axis = 0; axis < pool_.dim; ++axis) {
      double lo = kInfinity, hi = -kInfinity;
      for (std::size_t i = offset; i < offset + count; ++i) {
        const double c = src_coords_[static_cast<std::size_t>(order_[i]) * pool_.dim + axis];
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_axis = axis;
      }
    }
    return best_axis;
  }

  static std::size_t median_rank(std::size_t m) { return (m + 1) / 2; }  // ceil(m/2)

  std::uint32_t bucket_;
  TreePool pool_;
  std::vector<double> src_coords_;
  std::vector<std::uint32_t> src_ids_;
  std::vector<std::uint32_t> order_;
};

inline std::size_t tree_depth(const TreePool& pool, std::uint32_t index) {
  if (index == kNoNode) return 0;
  const TreeNode& node = pool.nodes[index];
  return 1 + std::max(tree_depth(pool, node.left), tree_depth(pool, node.right));
}

}  // namespace detail

/// k-d tree after the classic construction: every node stores one point,
/// interior nodes additionally store the splitting hyperplane through it.
class KdTree {
 public:
  KdTree() = default;

  static KdTree build(const PointSet& points) {
    detail::TreeBuilder builder(points, 0);
    return KdTree(builder.take());
  }

  /// Wraps an already-validated pool (deserialization path).
  static KdTree from_pool(detail::TreePool pool) { return KdTree(std::move(pool)); }

  std::size_t dim() const { return pool_.dim; }
  std::size_t size() const { return pool_.point_count(); }
  bool empty() const { return pool_.point_count() == 0; }
  std::uint32_t root() const { return pool_.root; }
  std::size_t node_count() const { return pool_.nodes.size(); }
  std::size_t depth() const { return detail::tree_depth(pool_, pool_.root); }

  const TreeNode& node(std::uint32_t index) const { return pool_.nodes[index]; }
  std::span<const double> point_coords(std::uint32_t slot) const {
    return pool_.point_coords(slot);
  }
  std::uint32_t point_id(std::uint32_t slot) const { return pool_.ids[slot]; }

  const detail::TreePool& pool() const { return pool_; }

 private:
  explicit KdTree(detail::TreePool pool) : pool_(std::move(pool)) {}
  detail::TreePool pool_;
};

/// k-d tree variant with points only in the leaves, between ceil(b/2) and b
/// per non-empty leaf once n >= b.
class BucketTree {
 public:
  BucketTree() = default;

  static BucketTree build(const PointSet& points, std::uint32_t bucket_capacity) {
    if (bucket_capacity < 1)
      throw std::invalid_argument("BucketTree: bucket capacity must be >= 1");
    detail::TreeBuilder builder(points, bucket_capacity);
    return BucketTree(builder.take());
  }

  /// Wraps an already-validated pool (deserialization path).
  static BucketTree from_pool(detail::TreePool pool) { return BucketTree(std::move(pool)); }

  std::size_t dim() const { return pool_.dim; }
  std::size_t size() const { return pool_.point_count(); }
  bool empty() const { return pool_.point_count() == 0; }
  std::uint32_t root() const { return pool_.root; }
  std::size_t node_count() const { return pool_.nodes.size(); }
  std::size_t depth() const { return detail::tree_depth(pool_, pool_.root); }
  std::uint32_t bucket_capacity() const { return pool_.bucket_capacity; }

  const TreeNode& node(std::uint32_t index) const { return pool_.nodes[index]; }
  std::span<const double> point_coords(std::uint32_t slot) const {
    return pool_.point_coords(slot);
  }
  std::uint32_t point_id(std::uint32_t slot) const { return pool_.ids[slot]; }

  /// Leaf sizes in preorder.
  std::vector<std::size_t> leaf_census() const {
    std::vector<std::size_t> sizes;
    for (const TreeNode& node : pool_.nodes)
      if (node.is_leaf()) sizes.push_back(node.point_count);
    return sizes;
  }

  const detail::TreePool& pool() const { return pool_; }

 private:
  explicit BucketTree(detail::TreePool pool) : pool_(std::move(pool)) {}
  detail::TreePool pool_;
};

/// Dimension along which `points` has the largest spread (max - min);
/// ties break to the lowest dimension index.
inline std::size_t spread_dimension(const PointSet& points) {
  if (points.empty())
    throw std::invalid_argument("spread_dimension: empty point set");
  std::size_t best_axis = 0;
  double best_spread = -1.0;
  for (std::size_t axis = 0; axis < points.dim(); ++axis) {
    double lo = kInfinity, hi = -kInfinity;
    for (const Point& p : points) {
      lo = std::min(lo, p.coords[axis]);
      hi = std::max(hi, p.coords[axis]);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_axis = axis;
    }
  }
  return best_axis;
}

/// Median selection under the (coordinate, id) order along `dim`: the
/// element of rank ceil(m/2), the m/2-rounded-down smaller elements, and
/// the rest. Expected linear time.
struct MedianSelection {
  Point median;
  std::vector<Point> before;
  std::vector<Point> after;
};

inline MedianSelection select_median(const PointSet& points, std::size_t dim) {
  if (points.empty())
    throw std::invalid_argument("select_median: empty point set");
  if (dim >= points.dim())
    throw std::out_of_range("select_median: dimension index out of range");
  std::vector<std::uint32_t> order(points.size());
  std::iota(order.begin(), order.end(), 0u);
  const std::size_t mid = (points.size() + 1) / 2 - 1;
  select_nth(order.begin(), order.begin() + mid, order.end(),
             [&](std::uint32_t a, std::uint32_t b) {
               return less_along(dim, points[a], points[b]);
             });
  MedianSelection result;
  result.median = points[order[mid]];
  for (std::size_t i = 0; i < mid; ++i) result.before.push_back(points[order[i]]);
  for (std::size_t i = mid + 1; i < order.size(); ++i) result.after.push_back(points[order[i]]);
  return result;
}

}  // namespace kdx
