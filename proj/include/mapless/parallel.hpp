#ifndef MAPLESS_PARALLEL_HPP
#define MAPLESS_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mapless {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
/// thrown by any task is rethrown after all threads finish.
inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::clamp(jobs, 1, std::max(n, 1));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mapless

#endif  // MAPLESS_PARALLEL_HPP
