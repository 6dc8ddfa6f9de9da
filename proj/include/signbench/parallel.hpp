#ifndef SIGNBENCH_PARALLEL_HPP
#define SIGNBENCH_PARALLEL_HPP

#include <atomic>
#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace signbench {

/// Process-wide worker pool. Work is always split into blocks whose count
/// depends only on the problem size, never on the thread count; each block
/// writes disjoint outputs and cross-block folds run serially in block
/// order, so results are identical for any --threads value.
class ThreadPool {
 public:
  static ThreadPool& instance() {
    static ThreadPool pool;
    return pool;
  }

  /// Caps the number of worker threads (including the calling thread).
  void set_threads(unsigned n) {
    std::lock_guard<std::mutex> lk(config_mutex_);
    threads_ = n == 0 ? default_threads() : n;
  }

  unsigned threads() {
    std::lock_guard<std::mutex> lk(config_mutex_);
    return threads_;
  }

  /// Runs fn(block_index) for block_index in [0, nblocks). Blocks on
  /// completion. The first exception thrown by any block is rethrown.
  /// Nested calls from inside a pool task run serially.
  void run_blocks(std::size_t nblocks, const std::function<void(std::size_t)>& fn) {
    if (nblocks == 0) return;
    unsigned nthreads = threads();
    if (nblocks == 1 || nthreads <= 1 || in_pool_task()) {
      for (std::size_t b = 0; b < nblocks; ++b) fn(b);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;
    auto worker = [&] {
      in_pool_task() = true;
      for (;;) {
        std::size_t b = next.fetch_add(1);
        if (b >= nblocks) break;
        try {
          fn(b);
        } catch (...) {
          std::lock_guard<std::mutex> lk(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
      in_pool_task() = false;
    };
    std::size_t helper_count = std::min<std::size_t>(nthreads - 1, nblocks - 1);
    std::vector<std::thread> helpers;
    helpers.reserve(helper_count);
    for (std::size_t t = 0; t < helper_count; ++t) helpers.emplace_back(worker);
    worker();
    for (auto& h : helpers) h.join();
    if (first_error) std::rethrow_exception(first_error);
  }

 private:
  ThreadPool() : threads_(default_threads()) {}

  static bool& in_pool_task() {
    thread_local bool flag = false;
    return flag;
  }

  static unsigned default_threads() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
  }

  std::mutex config_mutex_;
  unsigned threads_;
};

/// parallel_for(begin, end, grain, fn): fn(lo, hi) over fixed-size chunks.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, std::size_t grain, Fn&& fn) {
  if (end <= begin) return;
  if (grain == 0) grain = 1;
  std::size_t n = end - begin;
  std::size_t nblocks = (n + grain - 1) / grain;
  ThreadPool::instance().run_blocks(nblocks, [&](std::size_t b) {
    std::size_t lo = begin + b * grain;
    std::size_t hi = std::min(end, lo + grain);
    fn(lo, hi);
  });
}

}  // namespace signbench

#endif  // SIGNBENCH_PARALLEL_HPP
