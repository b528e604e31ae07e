#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <numeric>
#include <set>
#include <vector>

#include "kdx/point.hpp"
#include "kdx/rng.hpp"
#include "kdx/tree.hpp"
#include "test_support.hpp"

using namespace kdx;

namespace {

std::size_t ceil_log2(std::size_t n) {
  return n <= 1 ? 0 : std::bit_width(n - 1);
}

std::set<std::uint32_t> id_set(const std::vector<Point>& points) {
  std::set<std::uint32_t> ids;
  for (const Point& p : points) ids.insert(p.id);
  return ids;
}

// Collects the point-pool slots of a whole subtree.
template <typename Tree>
void collect_slots(const Tree& tree, std::uint32_t index,
                   std::vector<std::uint32_t>& slots) {
  if (index == kNoNode) return;
  const TreeNode& node = tree.node(index);
  for (std::uint32_t s = node.first_point; s < node.first_point + node.point_count; ++s)
    slots.push_back(s);
  collect_slots(tree, node.left, slots);
  collect_slots(tree, node.right, slots);
}

// Every left-subtree point strictly precedes the node's point under
// compare_along, every right-subtree point strictly succeeds it.
void check_interior_partition(const KdTree& tree, std::uint32_t index) {
  if (index == kNoNode) return;
  const TreeNode& node = tree.node(index);
  if (!node.is_leaf()) {
    const Point pivot(std::vector<double>(tree.point_coords(node.first_point).begin(),
                                          tree.point_coords(node.first_point).end()),
                      tree.point_id(node.first_point));
    std::vector<std::uint32_t> slots;
    collect_slots(tree, node.left, slots);
    for (const std::uint32_t s : slots) {
      const Point p(std::vector<double>(tree.point_coords(s).begin(),
                                        tree.point_coords(s).end()),
                    tree.point_id(s));
      REQUIRE(less_along(node.split_dim, p, pivot));
    }
    slots.clear();
    collect_slots(tree, node.right, slots);
    for (const std::uint32_t s : slots) {
      const Point p(std::vector<double>(tree.point_coords(s).begin(),
                                        tree.point_coords(s).end()),
                    tree.point_id(s));
      REQUIRE(less_along(node.split_dim, pivot, p));
    }
  }
  check_interior_partition(tree, node.left);
  check_interior_partition(tree, node.right);
}

// Every leaf point satisfies all plane predicates on its root path.
void check_bucket_partition(const BucketTree& tree, std::uint32_t index) {
  if (index == kNoNode) return;
  const TreeNode& node = tree.node(index);
  if (!node.is_leaf()) {
    std::vector<std::uint32_t> slots;
    collect_slots(tree, node.left, slots);
    for (const std::uint32_t s : slots)
      REQUIRE(tree.point_coords(s)[node.split_dim] <= node.split_value);
    slots.clear();
    collect_slots(tree, node.right, slots);
    for (const std::uint32_t s : slots)
      REQUIRE(tree.point_coords(s)[node.split_dim] >= node.split_value);
  }
  check_bucket_partition(tree, node.left);
  check_bucket_partition(tree, node.right);
}

bool pools_identical(const detail::TreePool& a, const detail::TreePool& b) {
  if (a.dim != b.dim || a.root != b.root ||
      a.bucket_capacity != b.bucket_capacity ||
      a.nodes.size() != b.nodes.size() || a.ids != b.ids || a.coords != b.coords)
    return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const TreeNode& x = a.nodes[i];
    const TreeNode& y = b.nodes[i];
    if (x.split_dim != y.split_dim || x.split_value != y.split_value ||
        x.left != y.left || x.right != y.right || x.first_point != y.first_point ||
        x.point_count != y.point_count)
      return false;
  }
  return true;
}

PointSet permuted(const PointSet& points, Xoshiro256pp& rng) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0u);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.next() % i]);
  PointSet out(points.dim());
  for (const std::size_t i : order) out.add(points[i]);
  return out;
}

}  // namespace

TEST_CASE("spread_dimension: known values") {
  CHECK(spread_dimension(testing::figure_points()) == 0);  // x/y tie -> lowest index

  PointSet vertical(2);
  vertical.add(Point({0.0, 0.0}, 0));
  vertical.add(Point({0.0, 5.0}, 1));
  CHECK(spread_dimension(vertical) == 1);

  PointSet left_subtree(2);  // figure's left branch: x-spread 1.5, y-spread 5.0
  left_subtree.add(Point({1.0, 6.5}, 0));
  left_subtree.add(Point({1.5, 1.5}, 1));
  left_subtree.add(Point({2.5, 4.5}, 2));
  CHECK(spread_dimension(left_subtree) == 1);

  CHECK_THROWS_AS(spread_dimension(PointSet(2)), std::invalid_argument);
}

TEST_CASE("select_median: figure examples") {
  const PointSet figure = testing::figure_points();

  SECTION("whole set along x: median p4") {
    const MedianSelection sel = select_median(figure, 0);
    CHECK(sel.median.id == 3);
    CHECK(id_set(sel.before) == std::set<std::uint32_t>{0, 1, 2});
    CHECK(id_set(sel.after) == std::set<std::uint32_t>{4, 5, 6, 7});
  }

  SECTION("single point") {
    PointSet one(2);
    one.add(Point({5.0, 5.0}, 0));
    const MedianSelection sel = select_median(one, 0);
    CHECK(sel.median.id == 0);
    CHECK(sel.before.empty());
    CHECK(sel.after.empty());
  }

  SECTION("right half along y: median p5, rank 2 of 4") {
    PointSet right(2);
    right.add(figure[6]);  // p7
    right.add(figure[4]);  // p5
    right.add(figure[5]);  // p6
    right.add(figure[7]);  // p8
    const MedianSelection sel = select_median(right, 1);
    CHECK(sel.median.id == 4);
    CHECK(id_set(sel.before) == std::set<std::uint32_t>{6});
    CHECK(id_set(sel.after) == std::set<std::uint32_t>{5, 7});
  }

  CHECK_THROWS_AS(select_median(PointSet(2), 0), std::invalid_argument);
  CHECK_THROWS_AS(select_median(figure, 2), std::out_of_range);
}

TEST_CASE("build: golden figure tree") {
  const KdTree tree = KdTree::build(testing::figure_points());
  REQUIRE(tree.node_count() == 8);
  REQUIRE(tree.size() == 8);
  CHECK(tree.depth() == 4);

  const TreeNode& root = tree.node(tree.root());
  CHECK(tree.point_id(root.first_point) == 3);  // p4
  CHECK(root.split_dim == 0);
  CHECK(root.split_value == 4.0);

  const TreeNode& l = tree.node(root.left);  // p3, splits y = 4.5
  CHECK(tree.point_id(l.first_point) == 2);
  CHECK(l.split_dim == 1);
  CHECK(l.split_value == 4.5);
  CHECK(tree.point_id(tree.node(l.left).first_point) == 1);   // p2
  CHECK(tree.node(l.left).is_leaf());
  CHECK(tree.point_id(tree.node(l.right).first_point) == 0);  // p1
  CHECK(tree.node(l.right).is_leaf());

  const TreeNode& r = tree.node(root.right);  // p5, splits y = 2
  CHECK(tree.point_id(r.first_point) == 4);
  CHECK(r.split_dim == 1);
  CHECK(r.split_value == 2.0);
  CHECK(tree.point_id(tree.node(r.left).first_point) == 6);  // p7
  CHECK(tree.node(r.left).is_leaf());

  const TreeNode& rr = tree.node(r.right);  // p6, splits y = 6.5, children {} and p8
  CHECK(tree.point_id(rr.first_point) == 5);
  CHECK(rr.split_dim == 1);
  CHECK(rr.split_value == 6.5);
  CHECK(rr.left == kNoNode);
  REQUIRE(rr.right != kNoNode);
  CHECK(tree.point_id(tree.node(rr.right).first_point) == 7);  // p8
  CHECK(tree.node(rr.right).is_leaf());
}

TEST_CASE("build: empty and single-point base cases") {
  const KdTree empty = KdTree::build(PointSet(3));
  CHECK(empty.empty());
  CHECK(empty.node_count() == 0);
  CHECK(empty.depth() == 0);
  CHECK(empty.root() == kNoNode);

  PointSet one(2);
  one.add(Point({5.0, 5.0}, 0));
  const KdTree single = KdTree::build(one);
  CHECK(single.node_count() == 1);
  CHECK(single.depth() == 1);
  CHECK(single.node(single.root()).is_leaf());
  CHECK(single.point_id(0) == 0);
}

TEST_CASE("build_bucket: figure examples") {
  const PointSet figure = testing::figure_points();

  SECTION("b = 8: everything in one leaf") {
    const BucketTree tree = BucketTree::build(figure, 8);
    CHECK(tree.leaf_census() == std::vector<std::size_t>{8});
    CHECK(tree.node_count() == 1);
  }

  SECTION("b = 1: eight singleton leaves") {
    const BucketTree tree = BucketTree::build(figure, 1);
    const auto census = tree.leaf_census();
    CHECK(census.size() == 8);
    for (const std::size_t s : census) CHECK(s == 1);
    // interior nodes hold planes only
    for (std::uint32_t i = 0; i < tree.node_count(); ++i)
      if (!tree.node(i).is_leaf()) CHECK(tree.node(i).point_count == 0);
  }

  SECTION("b = 4: one split at x = 4, median goes left") {
    const BucketTree tree = BucketTree::build(figure, 4);
    CHECK(tree.leaf_census() == std::vector<std::size_t>{4, 4});
    const TreeNode& root = tree.node(tree.root());
    CHECK(root.split_dim == 0);
    CHECK(root.split_value == 4.0);
    std::vector<std::uint32_t> left_slots, right_slots;
    collect_slots(tree, root.left, left_slots);
    collect_slots(tree, root.right, right_slots);
    std::set<std::uint32_t> left_ids, right_ids;
    for (const auto s : left_slots) left_ids.insert(tree.point_id(s));
    for (const auto s : right_slots) right_ids.insert(tree.point_id(s));
    CHECK(left_ids == std::set<std::uint32_t>{0, 1, 2, 3});
    CHECK(right_ids == std::set<std::uint32_t>{4, 5, 6, 7});
  }

  CHECK_THROWS_AS(BucketTree::build(figure, 0), std::invalid_argument);
}

TEST_CASE("build is deterministic under input permutation") {
  Xoshiro256pp rng(808);
  for (int iter = 0; iter < 20; ++iter) {
    const std::size_t n = 1 + rng.next() % 300;
    const std::size_t d = 1 + rng.next() % 4;
    const PointSet points = iter % 2 == 0 ? testing::random_point_set(n, d, rng)
                                          : testing::gridded_point_set(n, d, rng);
    const PointSet shuffled = permuted(points, rng);
    CHECK(pools_identical(KdTree::build(points).pool(),
                          KdTree::build(shuffled).pool()));
    const std::uint32_t b = 1u << (rng.next() % 4);
    CHECK(pools_identical(BucketTree::build(points, b).pool(),
                          BucketTree::build(shuffled, b).pool()));
  }
}

TEST_CASE("balance and storage over random sizes") {
  Xoshiro256pp rng(2718);
  for (int iter = 0; iter < 60; ++iter) {
    const std::size_t n = 1 + rng.next() % 1000;
    const std::size_t d = 1 + rng.next() % 5;
    const PointSet points = testing::random_point_set(n, d, rng);
    const KdTree tree = KdTree::build(points);
    CHECK(tree.node_count() == n);
    CHECK(tree.depth() <= ceil_log2(n) + 1);
  }
}

TEST_CASE("partition soundness: zero violations") {
  Xoshiro256pp rng(161803);
  for (int iter = 0; iter < 15; ++iter) {
    const std::size_t n = 1 + rng.next() % 200;
    const std::size_t d = 1 + rng.next() % 3;
    const PointSet points = iter % 2 == 0 ? testing::random_point_set(n, d, rng)
                                          : testing::gridded_point_set(n, d, rng, 3);
    const KdTree tree = KdTree::build(points);
    check_interior_partition(tree, tree.root());
    const BucketTree bucket = BucketTree::build(points, 1 + rng.next() % 8);
    check_bucket_partition(bucket, bucket.root());
  }
}

TEST_CASE("bucket occupancy stays within [ceil(b/2), b]") {
  Xoshiro256pp rng(42424242);
  for (const std::uint32_t b : {1u, 2u, 4u, 8u, 16u}) {
    for (int iter = 0; iter < 12; ++iter) {
      const std::size_t n = b + rng.next() % 2000;
      const std::size_t d = 1 + rng.next() % 4;
      const PointSet points = testing::random_point_set(n, d, rng);
      const BucketTree tree = BucketTree::build(points, b);
      std::size_t total = 0;
      for (const std::size_t size : tree.leaf_census()) {
        CHECK(size >= (b + 1) / 2);
        CHECK(size <= b);
        total += size;
      }
      CHECK(total == n);
    }
  }
}

TEST_CASE("coincident points build well-defined trees") {
  PointSet same(2);
  for (std::uint32_t i = 0; i < 17; ++i) same.add(Point({1.0, 1.0}, i));
  const KdTree tree = KdTree::build(same);
  CHECK(tree.node_count() == 17);
  check_interior_partition(tree, tree.root());
  const BucketTree bucket = BucketTree::build(same, 4);
  std::size_t total = 0;
  for (const std::size_t s : bucket.leaf_census()) {
    CHECK(s >= 2);
    CHECK(s <= 4);
    total += s;
  }
  CHECK(total == 17);
}

TEST_CASE("build time scales like n log n", "[!mayfail][slow]") {
  // Smoke check: t(2n)/t(n) should stay near 2 for n >= 2^16.
  Xoshiro256pp rng(5150);
  const auto timed_build = [&](std::size_t n) {
    const PointSet points = testing::random_point_set(n, 2, rng);
    const auto start = std::chrono::steady_clock::now();
    const KdTree tree = KdTree::build(points);
    const auto stop = std::chrono::steady_clock::now();
    REQUIRE(tree.node_count() == n);
    return std::chrono::duration<double>(stop - start).count();
  };
  std::vector<double> ratios;
  for (int rep = 0; rep < 5; ++rep)
    ratios.push_back(timed_build(1u << 17) / timed_build(1u << 16));
  std::sort(ratios.begin(), ratios.end());
  const double median_ratio = ratios[ratios.size() / 2];
  INFO("median t(2n)/t(n) = " << median_ratio);
  CHECK(median_ratio <= 2.6);
}
