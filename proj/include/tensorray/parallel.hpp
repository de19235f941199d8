#pragma once

#include <cstddef>
#include <functional>

namespace tensorray {

/// Worker count used by every parallel sweep. Zero means hardware concurrency.
void set_workers(unsigned n);
unsigned workers();

/// Runs body(i) for i in [0, count) on contiguous blocks, one block per
/// worker. Each i must write only to its own output slot; callers reduce
/// afterwards in index order, so results do not depend on the worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Sum of values in a fixed pairwise tree.
template <class T, class It>
T pairwise_sum(It first, It last) {
  const auto n = last - first;
  if (n <= 8) {
    T s{};
    for (; first != last; ++first) s += *first;
    return s;
  }
  It mid = first + n / 2;
  return pairwise_sum<T>(first, mid) + pairwise_sum<T>(mid, last);
}

}  // namespace tensorray
