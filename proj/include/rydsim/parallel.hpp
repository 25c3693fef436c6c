// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_PARALLEL_HPP
#define RYDSIM_PARALLEL_HPP

#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace rydsim {

/// Worker count: RYDSIM_THREADS when set, hardware concurrency otherwise.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("RYDSIM_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

/// Runs body(i) for i in [0, n) on `threads` workers with static chunking.
/// Results must be written to disjoint slots; any exception is rethrown on
/// the calling thread after the join.
template <typename Body>
void parallel_for(std::size_t n, const Body& body, unsigned threads = 0) {
  if (threads == 0) threads = default_thread_count();
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  if (threads > n) threads = static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = begin + chunk < n ? begin + chunk : n;
    pool.emplace_back([&, t, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace rydsim

#endif  // RYDSIM_PARALLEL_HPP
