#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace facetproc {

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// seed_task = mix64(master ^ mix64(task + 0x9e3779b97f4a7c15)). Stable across
/// platforms and thread counts; every task's stream depends only on (master, task).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t task);

/// Fixed-size worker pool; results are written by index so reductions stay
/// in task order regardless of scheduling.
class WorkerPool {
 public:
  /// 0 = FACETPROC_THREADS or hardware_concurrency.
  explicit WorkerPool(unsigned threads = 0);
  unsigned size() const { return threads_; }

  template <class Fn>
  void parallel_for(std::size_t n, Fn&& fn) const {
    if (n == 0) return;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads_, n));
    if (workers <= 1) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < n; i = next++) {
            try {
              fn(i);
            } catch (...) {
              std::lock_guard lock(error_mutex);
              if (!error) error = std::current_exception();
            }
          }
        });
      }
    }
    if (error) std::rethrow_exception(error);
  }

 private:
  unsigned threads_;
};

const WorkerPool& default_pool();

}  // namespace facetproc
