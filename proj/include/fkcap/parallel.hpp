#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fkcap {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs fn(i) for i in [0, n).  Work items are claimed atomically; fn must
// only write to per-index state, so results do not depend on the thread
// count.  The first exception thrown by any worker is rethrown here.
inline void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  int t = resolve_threads(threads);
  if (t <= 1 || n == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  if (t > n) t = static_cast<int>(n);
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      long i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(t));
  for (int k = 0; k < t; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace fkcap
