#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gea::detail {

// Calls fn(i) for i in [0, n). With `workers` > 1 the calls are spread over
// that many threads; the first exception thrown is rethrown after all join.
template <typename Fn>
void for_each_index(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

inline std::size_t default_workers() {
  return std::max<std::size_t>(2, std::thread::hardware_concurrency());
}

}  // namespace gea::detail
