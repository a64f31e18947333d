#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace synapse {

/// Runs `fn(begin, end)` over contiguous chunks of [0, count) on up to
/// `threads` workers. Chunks are disjoint so writes into per-index slots need
/// no locking. The first exception thrown by any worker is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count < 2) {
    fn(std::size_t{0}, count);
    return;
  }
  const std::size_t n = std::min(workers, count);
  const std::size_t chunk = (count + n - 1) / n;
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (std::size_t w = 0; w < n; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(count, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        try {
          fn(begin, end);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace synapse
