#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace eoscorr {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items must write
// only their own output slots; results are then independent of scheduling.
// The first exception thrown by any item is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (n == 0) return;
  const auto hw = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = hw > 0 ? hw : 1;
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);

  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load(std::memory_order_relaxed)) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace eoscorr
