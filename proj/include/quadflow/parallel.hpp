#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace quadflow {

namespace detail {
inline std::atomic<int>& thread_budget() {
  static std::atomic<int> budget{0};  // 0 = uninitialized
  return budget;
}
}  // namespace detail

// Worker-thread budget for the row-parallel kernels. Initialized from
// QUADFLOW_THREADS on first use; settable programmatically. Results are
// identical for any budget because every output row is computed
// independently from immutable inputs.
inline int thread_count() {
  int cur = detail::thread_budget().load(std::memory_order_relaxed);
  if (cur > 0) return cur;
  int n = 1;
  if (const char* env = std::getenv("QUADFLOW_THREADS")) {
    n = std::atoi(env);
    if (n < 1) n = 1;
  } else {
    unsigned hw = std::thread::hardware_concurrency();
    n = hw > 0 ? static_cast<int>(hw) : 1;
    if (n > 8) n = 8;
  }
  detail::thread_budget().store(n, std::memory_order_relaxed);
  return n;
}

// n >= 1 pins the budget; n <= 0 clears it so the next call re-reads the
// environment.
inline void set_thread_count(int n) {
  detail::thread_budget().store(n < 1 ? 0 : n, std::memory_order_relaxed);
}

// Runs fn(row) for row in [0, rows). Static contiguous partition per thread.
template <typename Fn>
void parallel_rows(int rows, Fn&& fn) {
  const int threads = std::min(thread_count(), rows);
  if (threads <= 1) {
    for (int r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const int chunk = (rows + threads - 1) / threads;
  for (int tid = 0; tid < threads; ++tid) {
    const int begin = tid * chunk;
    const int end = std::min(rows, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (int r = begin; r < end; ++r) fn(r);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace quadflow
