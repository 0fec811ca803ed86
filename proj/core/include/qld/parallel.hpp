#pragma once

// Data-parallel sweep helper.  Worker count is capped by the QLD_THREADS
// environment variable (default: hardware concurrency, at most 8).  Chunking
// is fixed and independent of the thread count, so reductions that sum fixed
// chunk partials stay bit-identical however many workers run.

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace qld {

inline int worker_count() {
  static const int n = [] {
    if (const char* env = std::getenv("QLD_THREADS")) {
      const int v = std::atoi(env);
      if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return int(hw == 0 ? 1 : (hw > 8 ? 8 : hw));
  }();
  return n;
}

/// Runs fn(i) for i in [0, n).  Each index is visited exactly once; fn must
/// only write state owned by index i.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  const int workers = worker_count();
  if (workers <= 1 || n < 2048) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace qld
