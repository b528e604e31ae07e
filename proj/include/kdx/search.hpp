#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "kdx/neighbors.hpp"
#include "kdx/point.hpp"
#include "kdx/tree.hpp"

// Epsilon-bounded k-nearest-neighbor search over both tree variants.
//
// The traversal descends first into the child whose region contains the
// query, then visits the far child only if it could still contribute: the
// hyperplane must be within eps of the query, and either the candidate list
// is not full or its farthest entry is no closer than the hyperplane. The
// far-child test uses >= rather than the textbook strict >, which changes
// nothing on distance-generic inputs but is required for exactness when the
// k-th distance ties across a splitting plane and the smaller id has to win.

namespace kdx {

/// Result of one kNN query: neighbors in nondecreasing (distance, id) order
/// plus the traversal counters.
struct KnnResult {
  std::vector<Neighbor> neighbors;
  QueryStats stats;
};

namespace detail {

template <typename Tree>
class KnnSearcher {
 public:
  KnnSearcher(const Tree& tree, std::span<const double> query, std::size_t k,
              double eps, bool prune)
      : tree_(tree), query_(query), eps_(eps), prune_(prune), list_(k, eps) {}

  KnnResult run() {
    if (tree_.root() != kNoNode) visit(tree_.root());
    return {list_.sorted(), stats_};
  }

 private:
  void visit(std::uint32_t index) {
    const TreeNode& node = tree_.node(index);
    ++stats_.nodes_visited;
    if (node.is_leaf()) ++stats_.buckets_examined;

    for (std::uint32_t slot = node.first_point;
         slot < node.first_point + node.point_count; ++slot) {
      ++stats_.distance_evaluations;
      const double d = distance(query_, tree_.point_coords(slot));
      list_.offer(d, tree_.point_id(slot));
    }
    if (node.is_leaf()) return;

    const double plane_distance =
        std::abs(query_[node.split_dim] - node.split_value);
    const bool query_left = query_[node.split_dim] <= node.split_value;
    const std::uint32_t near = query_left ? node.left : node.right;
    const std::uint32_t far = query_left ? node.right : node.left;

    if (near != kNoNode) visit(near);
    if (far != kNoNode && (!prune_ || should_visit_far(plane_distance)))
      visit(far);
  }

  bool should_visit_far(double plane_distance) const {
    if (plane_distance > eps_) return false;
    return !list_.full() || list_.farthest() >= plane_distance;
  }

  const Tree& tree_;
  std::span<const double> query_;
  double eps_;
  bool prune_;
  NeighborList list_;
  QueryStats stats_;
};

template <typename Tree>
KnnResult knn_impl(const Tree& tree, const Point& query, std::size_t k,
                   double eps, bool prune) {
  if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
  if (eps < 0.0) throw std::invalid_argument("knn: eps must be non-negative");
  if (!tree.empty() && query.dim() != tree.dim())
    throw std::invalid_argument("knn: query dimension mismatch");
  KnnSearcher<Tree> searcher(tree, query.coords, k, eps, prune);
  return searcher.run();
}

}  // namespace detail

/// k nearest neighbors of `query` within distance `eps`, over either tree
/// variant. Returns min(k, |{q : d(query,q) <= eps}|) neighbors; ties at the
/// k-th rank go to the smaller id.
template <typename Tree>
KnnResult knn(const Tree& tree, const Point& query, std::size_t k,
              double eps = kInfinity) {
  return detail::knn_impl(tree, query, k, eps, /*prune=*/true);
}

/// Same result as knn() but visits every node: the pruning-soundness
/// witness used by the test suites.
template <typename Tree>
KnnResult knn_unpruned(const Tree& tree, const Point& query, std::size_t k,
                       double eps = kInfinity) {
  return detail::knn_impl(tree, query, k, eps, /*prune=*/false);
}

/// Elementwise knn() over a batch of queries.
template <typename Tree>
std::vector<KnnResult> knn_batch(const Tree& tree, std::span<const Point> queries,
                                 std::size_t k, double eps = kInfinity) {
  std::vector<KnnResult> results;
  results.reserve(queries.size());
  for (const Point& q : queries) results.push_back(knn(tree, q, k, eps));
  return results;
}

}  // namespace kdx
