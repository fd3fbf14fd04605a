#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rslimits {

/// out[i] = f(i) for i in [0, count), spread over up to `threads` workers.
/// Results land at their own index, so any later reduction in index order is
/// independent of scheduling. The first exception thrown by f is rethrown.
template <typename T, typename F> std::vector<T> parallel_map(std::int64_t count, int threads, F &&f) {
  std::vector<T> out(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
  const auto workers = static_cast<int>(std::clamp<std::int64_t>(std::min<std::int64_t>(threads, count), 1, 1024));
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = f(i);
    return out;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          out[static_cast<std::size_t>(i)] = f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  for (auto &t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

} // namespace rslimits
