#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace specsde {

/// Runs body(block_index) for block_index in [0, n_blocks) across up to
/// n_threads workers. Blocks are a fixed partition of the work, so results
/// keyed by block index are independent of the worker count; callers must
/// reduce them in block order to stay byte-deterministic.
inline void parallel_for_blocks(long n_blocks, int n_threads,
                                const std::function<void(long)>& body) {
  if (n_threads <= 0) {
    n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads <= 0) n_threads = 1;
  }
  if (n_threads == 1 || n_blocks <= 1) {
    for (long b = 0; b < n_blocks; ++b) body(b);
    return;
  }
  std::mutex mu;
  long next = 0;
  std::exception_ptr error;
  auto worker = [&]() {
    for (;;) {
      long b;
      {
        std::scoped_lock lock(mu);
        if (error || next >= n_blocks) return;
        b = next++;
      }
      try {
        body(b);
      } catch (...) {
        std::scoped_lock lock(mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<long>(n_threads, n_blocks));
  pool.reserve(static_cast<size_t>(spawn));
  for (int i = 0; i < spawn; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace specsde
