#ifndef SMALELAB_PARALLEL_HPP
#define SMALELAB_PARALLEL_HPP

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace smalelab {

// Worker count: SMALELAB_THREADS, defaulting to the hardware count (capped).
inline int thread_count() {
  if (const char* env = std::getenv("SMALELAB_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1 && n <= 256) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw > 8 ? 8 : hw);
}

// Index-sliced parallel loop. Workers write to disjoint slots only, so results
// are byte-identical for every worker count; reductions happen sequentially
// in the caller.
inline void parallel_for(size_t n, const std::function<void(size_t)>& body) {
  const int workers = thread_count();
  if (workers <= 1 || n < 2048) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace smalelab

#endif
