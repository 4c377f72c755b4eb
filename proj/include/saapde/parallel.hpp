#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace saapde {

/// 0 or negative requests resolve to the hardware thread count.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n). Work is handed out by an atomic cursor in
/// fixed-size chunks; fn must only write to slots owned by its index.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& fn) {
  threads = resolve_threads(threads);
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  const std::size_t chunk = std::max<std::size_t>(1, n / (4 * threads));
  auto worker = [&] {
    for (;;) {
      const std::size_t begin = cursor.fetch_add(chunk);
      if (begin >= n) return;
      const std::size_t end = std::min(n, begin + chunk);
      for (std::size_t i = begin; i < end; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

namespace detail {

template <class T>
T pairwise_combine(std::vector<T>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return std::move(parts[lo]);
  const std::size_t mid = lo + (hi - lo) / 2;
  T left = pairwise_combine(parts, lo, mid);
  left += pairwise_combine(parts, mid, hi);
  return left;
}

}  // namespace detail

/// Deterministic block-pairwise reduction: items [0, n) are accumulated
/// left-to-right inside fixed blocks, block sums are combined over a fixed
/// binary tree. The result is a function of n and block size only, never of
/// the thread count.
template <class T, class LeafFn>
T blockwise_sum(std::size_t n, T zero, LeafFn&& accumulate, int threads,
                std::size_t block_size = 64) {
  if (n == 0) return zero;
  const std::size_t blocks = (n + block_size - 1) / block_size;
  std::vector<T> parts(blocks, zero);
  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t begin = b * block_size;
    const std::size_t end = std::min(n, begin + block_size);
    for (std::size_t i = begin; i < end; ++i) accumulate(i, parts[b]);
  });
  return detail::pairwise_combine(parts, 0, blocks);
}

}  // namespace saapde
