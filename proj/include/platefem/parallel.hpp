#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace platefem {

/// Worker count: hardware concurrency capped by the PLATE_THREADS environment
/// variable (values < 1 are treated as 1).
inline int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("PLATE_THREADS")) {
    try {
      const int cap = std::stoi(env);
      n = cap < 1 ? 1 : std::min(n, cap);
    } catch (...) {
      // ignore unparsable values
    }
  }
  return n;
}

/// Runs fn(i) for i in [0, count). Results must be written to per-index
/// slots; any reduction happens after the call, in index order, so the
/// outcome does not depend on the worker count.
template <class Fn>
void parallel_for(int count, Fn&& fn) {
  const int workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace platefem
