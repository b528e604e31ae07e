#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <iterator>

#include "kdx/rng.hpp"

// Rank selection in expected linear time: quickselect with pseudo-random
// pivots, falling back to median-of-medians pivoting once the recursion
// depth exceeds 2*log2(m). The fallback keeps the worst case linear.

namespace kdx {

template <typename It, typename Less>
void select_nth(It first, It nth, It last, Less less);

namespace detail {

// Insertion sort; used only on short ranges and groups of five.
template <typename It, typename Less>
void insertion_sort(It first, It last, Less less) {
  for (It i = first; i != last; ++i) {
    for (It j = i; j != first && less(*j, *(j - 1)); --j) std::iter_swap(j, j - 1);
  }
}

// Moves a median-of-medians pivot candidate to *first.
template <typename It, typename Less>
void median_of_medians_pivot(It first, It last, Less less) {
  const auto n = static_cast<std::size_t>(last - first);
  if (n <= 5) {
    insertion_sort(first, last, less);
    std::iter_swap(first, first + (n - 1) / 2);
    return;
  }
  // The median of each full group of five is swapped to the front of the
  // range; the pivot is the recursively selected median of those medians.
  It store = first;
  for (It group = first; last - group >= 5; group += 5) {
    insertion_sort(group, group + 5, less);
    std::iter_swap(store, group + 2);
    ++store;
  }
  It mid = first + (store - first - 1) / 2;
  select_nth(first, mid, store, less);
  std::iter_swap(first, mid);
}

// Lomuto partition around the pivot at *first. Returns the pivot's final
// position: everything left of it compares less, nothing right of it does.
template <typename It, typename Less>
It partition_around_first(It first, It last, Less less) {
  std::iter_swap(first, last - 1);  // park pivot at the end
  It pivot = last - 1;
  It store = first;
  for (It it = first; it != pivot; ++it) {
    if (less(*it, *pivot)) {
      std::iter_swap(it, store);
      ++store;
    }
  }
  std::iter_swap(store, pivot);
  return store;
}

template <typename It, typename Less>
void nth_element_select(It first, It nth, It last, Less less, int depth_budget) {
  // Pivot choice is pseudo-random but seed-free: the stream depends only on
  // the initial range size, so selection is deterministic across runs.
  SplitMix64 pivot_rng(0x6b7d096ff7f1a695ull ^ static_cast<std::uint64_t>(last - first));
  while (last - first > 16) {
    if (depth_budget-- > 0) {
      const auto n = static_cast<std::uint64_t>(last - first);
      std::iter_swap(first, first + static_cast<std::ptrdiff_t>(pivot_rng.next() % n));
    } else {
      median_of_medians_pivot(first, last, less);
    }
    It mid = partition_around_first(first, last, less);
    if (mid == nth) return;
    if (nth < mid)
      last = mid;
    else
      first = mid + 1;
  }
  insertion_sort(first, last, less);
}

}  // namespace detail

/// Places the element of rank (nth - first + 1) at *nth, with smaller
/// elements before it and larger ones after, under the strict order `less`.
/// Expected linear time; worst case linear via the median-of-medians
/// fallback.
template <typename It, typename Less>
void select_nth(It first, It nth, It last, Less less) {
  if (last - first <= 1 || nth == last) return;
  const auto m = static_cast<std::uint64_t>(last - first);
  const int depth_budget = 2 * std::bit_width(m);  // >= 2*log2(m)
  detail::nth_element_select(first, nth, last, less, depth_budget);
}

}  // namespace kdx
