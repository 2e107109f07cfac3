#ifndef PPP_PARALLEL_HPP
#define PPP_PARALLEL_HPP

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace ppp {

/// Splits [0, count) into `workers` contiguous blocks and runs
/// fn(worker, begin, end) on each, one thread per block. The partition
/// depends only on (count, workers); callers merge per-worker results in
/// worker order. The first exception thrown by any block is rethrown.
template <typename Fn>
void parallel_blocks(std::uint64_t count, unsigned workers, Fn&& fn) {
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2) {
    fn(0u, std::uint64_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = count * w / workers;
    const std::uint64_t end = count * (w + 1) / workers;
    threads.emplace_back([&, w, begin, end] {
      try {
        fn(w, begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace ppp

#endif  // PPP_PARALLEL_HPP
