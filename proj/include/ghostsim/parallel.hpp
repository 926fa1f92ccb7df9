#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ghostsim {

inline unsigned worker_count() {
  if (const char* env = std::getenv("GHOSTSIM_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Deterministic parallel map over [0, n): each index writes only its own
/// output slot, so the result is independent of the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const unsigned workers = worker_count();
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned t = 0; t < workers; ++t) {
    const std::size_t lo = static_cast<std::size_t>(t) * chunk;
    if (lo >= n) break;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([lo, hi, &fn, &first_error, &error_mutex] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ghostsim
