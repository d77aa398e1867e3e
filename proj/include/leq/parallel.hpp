#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace leq {

/// Process-wide cap on worker threads (CLI --threads). 0 = hardware default.
void set_max_threads(int n);
int max_threads();

/// Runs fn(i) for i in [0, n) across worker threads in fixed contiguous
/// chunks. Chunk assignment depends only on (n, thread count), so writers
/// into per-index slots produce scheduling-independent results.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const int hw = max_threads();
  const std::size_t workers =
      std::min<std::size_t>(n, hw > 0 ? static_cast<std::size_t>(hw) : 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace leq
