#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "kdx/neighbors.hpp"
#include "kdx/point.hpp"

namespace kdx {

/// Brute-force reference for epsilon-bounded kNN: computes every distance,
/// filters by eps, sorts by (distance, id), returns the first min(k, count).
/// Deliberately uses a full sort and no shared search machinery so it stays
/// obviously correct; this is the ground truth the tree search is tested
/// against.
inline std::vector<Neighbor> brute_force_knn(const PointSet& points,
                                             const Point& query, std::size_t k,
                                             double eps = kInfinity) {
  if (k < 1) throw std::invalid_argument("brute_force_knn: k must be >= 1");
  if (eps < 0.0)
    throw std::invalid_argument("brute_force_knn: eps must be non-negative");
  if (!points.empty() && query.dim() != points.dim())
    throw std::invalid_argument("brute_force_knn: query dimension mismatch");

  std::vector<Neighbor> all;
  all.reserve(points.size());
  for (const Point& p : points) {
    const double d = distance(query, p);
    if (d <= eps) all.push_back({d, p.id});
  }
  std::sort(all.begin(), all.end(), neighbor_less);
  if (all.size() > k) all.resize(k);
  return all;
}

}  // namespace kdx
