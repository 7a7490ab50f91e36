#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fnpp {

/// Worker count to use; 0 means one per hardware thread.
inline unsigned resolve_workers(unsigned workers) {
  if (workers != 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(i) for i in [0, n) on up to `workers` threads. Work items are
/// handed out dynamically, so bodies must write only to slot i of their
/// outputs. If several items throw, the exception of the lowest index is
/// rethrown after all threads have joined.
template <class Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
  const unsigned w = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), n));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex m;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(w - 1);
  for (unsigned k = 1; k < w; ++k) threads.emplace_back(run);
  run();
  for (auto& th : threads) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fnpp
