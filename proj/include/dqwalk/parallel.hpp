#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace dqwalk {

/// Worker count from DQWALK_THREADS (0 or unset = hardware concurrency).
inline unsigned default_thread_count() {
  unsigned n = 0;
  if (const char* env = std::getenv("DQWALK_THREADS")) {
    try {
      n = static_cast<unsigned>(std::stoul(env));
    } catch (...) {
      n = 0;
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Runs task(i) for i in [0, count) on up to `threads` workers. Each task
/// writes only its own output slot, so results do not depend on scheduling.
/// The first exception thrown by any task is rethrown on the caller.
template <typename Task>
void parallel_for(std::size_t count, unsigned threads, Task&& task) {
  if (threads == 0) threads = default_thread_count();
  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) task(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Pairwise (tree) reduction in a fixed order: sum of parts[lo, hi).
template <typename T, typename Add>
T pairwise_reduce(const std::vector<T>& parts, std::size_t lo, std::size_t hi, Add&& add) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return add(pairwise_reduce(parts, lo, mid, add), pairwise_reduce(parts, mid, hi, add));
}

}  // namespace dqwalk
