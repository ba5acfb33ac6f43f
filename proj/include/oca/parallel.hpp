#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace oca {

/// Parallelism context handed to library routines. Work is split into
/// contiguous index blocks, one per worker; callers that reduce results write
/// per-index terms and sum them in index order afterwards, so output never
/// depends on the thread count.
class Executor {
 public:
  explicit Executor(int threads = 1) : threads_(threads < 1 ? 1 : threads) {}

  int threads() const noexcept { return threads_; }

  // body(begin, end) is invoked on disjoint ranges covering [0, n).
  template <class Body>
  void for_blocks(std::size_t n, Body&& body) const {
    const std::size_t workers = std::min<std::size_t>(threads_, n);
    if (workers <= 1) {
      if (n > 0) body(std::size_t{0}, n);
      return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&](std::size_t begin, std::size_t end) {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    const std::size_t chunk = n / workers;
    const std::size_t extra = n % workers;
    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t end = begin + chunk + (w < extra ? 1 : 0);
      if (w + 1 == workers) {
        run(begin, end);
      } else {
        pool.emplace_back(run, begin, end);
      }
      begin = end;
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  template <class Body>
  void for_each(std::size_t n, Body&& body) const {
    for_blocks(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) body(i);
    });
  }

 private:
  int threads_;
};

inline const Executor& serial_executor() {
  static const Executor serial{1};
  return serial;
}

}  // namespace oca
