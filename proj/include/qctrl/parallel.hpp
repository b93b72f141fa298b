#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace qctrl {

/// Number of workers used for batch rollouts, optimizer restarts and sweep
/// grid points. Controlled by the QCTRL_WORKERS environment variable,
/// defaulting to the hardware concurrency (capped at 8).
inline int worker_count() {
  if (const char* env = std::getenv("QCTRL_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return std::min(v, 64);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}

namespace detail {
inline thread_local bool inside_parallel_region = false;
}

/// Runs fn(i) for i in [0, n). Work is pulled from a shared counter, so the
/// schedule is nondeterministic, but callers store results by index which
/// keeps outputs independent of the worker count. Nested calls degrade to
/// serial execution. The lowest-index exception is rethrown.
template <class F>
void parallel_for_indexed(int n, F&& fn) {
  if (n <= 0) return;
  const int workers = std::min(worker_count(), n);
  if (workers <= 1 || detail::inside_parallel_region) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto body = [&] {
    detail::inside_parallel_region = true;
    for (int i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace qctrl
