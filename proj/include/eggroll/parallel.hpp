#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace eggroll {

// Worker threads for population evaluation. EGGROLL_THREADS overrides the
// hardware default. Results must be written to disjoint, index-addressed
// slots; partitioning never affects values, only scheduling.
inline int thread_count() {
  if (const char* env = std::getenv("EGGROLL_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline void parallel_for(int n, const std::function<void(int)>& body) {
  const int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace eggroll
