#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fairrec::detail {

// Runs fn(0..n-1) across hardware threads. Each index is processed exactly
// once; the caller owns any per-index output slots, so results match the
// sequential order regardless of scheduling. The first thrown exception is
// rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = std::min<std::size_t>(n, hw == 0 ? 1 : hw);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace fairrec::detail
