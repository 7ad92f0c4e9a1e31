#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace cclab {

/// Chunked fork-join over [0, count).  Callers write results into
/// preallocated per-index slots, so the outcome never depends on the thread
/// count or scheduling order.
inline void parallel_for(int count, const std::function<void(int)>& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (hw == 1 || count < 64) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  const int num_threads = static_cast<int>(std::min<unsigned>(hw, 8));
  std::vector<std::thread> pool;
  pool.reserve(num_threads);
  const int chunk = (count + num_threads - 1) / num_threads;
  for (int t = 0; t < num_threads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace cclab
