#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace kdx {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A point in R^d with a stable integer identity. The id breaks coordinate
/// ties so that every point set has a unique total order along each
/// dimension, which is what makes tree construction deterministic.
struct Point {
  std::vector<double> coords;
  std::uint32_t id = 0;

  Point() = default;
  Point(std::vector<double> c, std::uint32_t point_id)
      : coords(std::move(c)), id(point_id) {}
  Point(std::initializer_list<double> c, std::uint32_t point_id)
      : coords(c), id(point_id) {}

  std::size_t dim() const { return coords.size(); }
};

/// An ordered collection of points sharing one dimensionality. Rejects
/// non-finite coordinates and duplicate ids at ingestion; everything
/// downstream may assume both invariants.
class PointSet {
 public:
  explicit PointSet(std::size_t dim) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("PointSet: dimension must be >= 1");
  }

  PointSet(std::size_t dim, std::vector<Point> points) : PointSet(dim) {
    points_.reserve(points.size());
    for (auto& p : points) add(std::move(p));
  }

  void add(Point p) {
    if (p.coords.size() != dim_)
      throw std::invalid_argument("PointSet: point has dimension " +
                                  std::to_string(p.coords.size()) +
                                  ", set has dimension " + std::to_string(dim_));
    for (const double c : p.coords)
      if (!std::isfinite(c))
        throw std::invalid_argument("PointSet: non-finite coordinate");
    if (!ids_.insert(p.id).second)
      throw std::invalid_argument("PointSet: duplicate id " + std::to_string(p.id));
    points_.push_back(std::move(p));
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  const Point& operator[](std::size_t i) const { return points_[i]; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }
  const std::vector<Point>& points() const { return points_; }

 private:
  std::size_t dim_;
  std::vector<Point> points_;
  std::unordered_set<std::uint32_t> ids_;
};

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("distance: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

/// Euclidean distance. Throws on dimension mismatch.
inline double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

inline double distance(const Point& a, const Point& b) {
  return distance(std::span<const double>(a.coords),
                  std::span<const double>(b.coords));
}

/// Strict total order along one dimension: by coordinate, then by id.
/// Never returns `equal` for distinct points.
inline std::strong_ordering compare_along(std::size_t dim, const Point& a,
                                          const Point& b) {
  if (dim >= a.dim() || dim >= b.dim())
    throw std::out_of_range("compare_along: dimension index out of range");
  if (a.coords[dim] < b.coords[dim]) return std::strong_ordering::less;
  if (a.coords[dim] > b.coords[dim]) return std::strong_ordering::greater;
  return a.id <=> b.id;
}

inline bool less_along(std::size_t dim, const Point& a, const Point& b) {
  return compare_along(dim, a, b) == std::strong_ordering::less;
}

/// Distance from a point to the axis-aligned hyperplane {x | x[dim] = value}.
/// This is the lower bound used to prune subtrees during search: no point
/// beyond the plane can be closer than this.
inline double hyperplane_distance(const Point& p, std::size_t dim,
                                  double value) {
  if (dim >= p.dim())
    throw std::out_of_range("hyperplane_distance: dimension index out of range");
  return std::abs(p.coords[dim] - value);
}

}  // namespace kdx
