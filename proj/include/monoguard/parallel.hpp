#ifndef MONOGUARD_PARALLEL_HPP_
#define MONOGUARD_PARALLEL_HPP_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace monoguard {

// Number of worker threads used when a caller passes 0.
inline unsigned DefaultThreadCount() {
  return std::max(1u, std::thread::hardware_concurrency());
}

// Calls body(i) for i in [0, n). Indices are split into contiguous blocks,
// one per thread, so results written by index do not depend on scheduling.
// The first exception thrown by any body is rethrown after all threads join.
inline void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& body,
                        unsigned threads = 0) {
  if (threads == 0) threads = DefaultThreadCount();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  const std::size_t block = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * block;
    const std::size_t end = std::min(n, begin + block);
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace monoguard

#endif  // MONOGUARD_PARALLEL_HPP_
