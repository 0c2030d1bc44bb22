#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kanto {

/// Upper bound on worker threads used by parallel sweeps. 0 resets to the
/// hardware concurrency. Initial value comes from KANTO_THREADS when set.
void set_thread_count(unsigned n);
unsigned thread_count();

namespace detail {
/// True on threads currently running a parallel_for body; nested sweeps run serially.
bool& in_parallel();
}  // namespace detail

/// Runs fn(i) for i in [0, n). Each index is visited exactly once; callers
/// write results into per-index slots so output is independent of scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_per_thread = 64) {
  const std::size_t workers =
      std::min<std::size_t>(thread_count(), (n + min_per_thread - 1) / std::max<std::size_t>(min_per_thread, 1));
  if (workers <= 1 || detail::in_parallel()) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t chunk = std::max<std::size_t>(1, n / (workers * 8));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    bool& flag = detail::in_parallel();
    const bool saved = flag;
    flag = true;
    try {
      for (;;) {
        const std::size_t start = next.fetch_add(chunk);
        if (start >= n) break;
        const std::size_t stop = std::min(n, start + chunk);
        for (std::size_t i = start; i < stop; ++i) fn(i);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(n);
    }
    flag = saved;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace kanto
