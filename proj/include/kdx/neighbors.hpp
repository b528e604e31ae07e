#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "kdx/point.hpp"

namespace kdx {

/// One search result: distance to the query and the point's id.
struct Neighbor {
  double distance = 0.0;
  std::uint32_t id = 0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// The (distance, id) lexicographic order used everywhere a k-th-best
/// candidate has to be chosen deterministically.
inline bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.id < b.id;
}

/// Traversal counters for one query.
struct QueryStats {
  std::uint64_t nodes_visited = 0;
  std::uint64_t buckets_examined = 0;  // leaf arrivals
  std::uint64_t distance_evaluations = 0;

  QueryStats& operator+=(const QueryStats& other) {
    nodes_visited += other.nodes_visited;
    buckets_examined += other.buckets_examined;
    distance_evaluations += other.distance_evaluations;
    return *this;
  }
};

/// Bounded best-k candidate list: keeps the k (distance, id)-smallest
/// entries offered so far, rejecting anything farther than max_distance.
/// Implemented as a max-heap on (distance, id), so replacement is O(log k).
class NeighborList {
 public:
  explicit NeighborList(std::size_t capacity, double max_distance = kInfinity)
      : capacity_(capacity), max_distance_(max_distance) {
    if (capacity < 1)
      throw std::invalid_argument("NeighborList: capacity must be >= 1");
    if (max_distance < 0.0)
      throw std::invalid_argument("NeighborList: negative distance bound");
    heap_.reserve(capacity);
  }

  /// Offers a candidate; returns true if it was stored.
  bool offer(double distance, std::uint32_t id) {
    if (distance > max_distance_) return false;
    const Neighbor candidate{distance, id};
    if (heap_.size() < capacity_) {
      heap_.push_back(candidate);
      std::push_heap(heap_.begin(), heap_.end(), neighbor_less);
      return true;
    }
    if (!neighbor_less(candidate, heap_.front())) return false;
    std::pop_heap(heap_.begin(), heap_.end(), neighbor_less);
    heap_.back() = candidate;
    std::push_heap(heap_.begin(), heap_.end(), neighbor_less);
    return true;
  }

  /// Largest stored distance, or +infinity while the list is not yet full.
  double farthest() const {
    if (heap_.size() < capacity_) return kInfinity;
    return heap_.front().distance;
  }

  std::size_t size() const { return heap_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return heap_.size() == capacity_; }
  double max_distance() const { return max_distance_; }

  /// Entries in nondecreasing (distance, id) order.
  std::vector<Neighbor> sorted() const {
    std::vector<Neighbor> out = heap_;
    std::sort(out.begin(), out.end(), neighbor_less);
    return out;
  }

 private:
  std::size_t capacity_;
  double max_distance_;
  std::vector<Neighbor> heap_;
};

}  // namespace kdx
