#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace graphtube {

/// Static block partition of [0, n) over `workers` threads.  fn(begin, end,
/// worker) must write results only into slots indexed by its own range, so
/// the outcome is independent of the worker count.  The lowest-indexed
/// worker's exception is rethrown, which keeps failures deterministic too.
template <class F>
void parallel_for_ranges(long n, int workers, F&& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || n <= 1) {
    fn(0L, n, 0);
    return;
  }
  const long chunk = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const long begin = static_cast<long>(w) * chunk;
    const long end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end, w] {
      try {
        fn(begin, end, w);
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace graphtube
