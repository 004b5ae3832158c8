#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace bsrspmm {

/// Fixed set of worker threads that execute chunked index ranges. The calling
/// thread participates, so a pool of size 1 has no background threads and runs
/// everything inline.
///
/// parallel_for must not be called re-entrantly from inside one of its own
/// tasks.
class WorkPool {
 public:
  explicit WorkPool(std::size_t workers = hardware_workers()) {
    workers = std::max<std::size_t>(workers, 1);
    threads_.reserve(workers - 1);
    for (std::size_t i = 0; i + 1 < workers; ++i) threads_.emplace_back([this] { worker_loop(); });
  }

  WorkPool(const WorkPool&) = delete;
  WorkPool& operator=(const WorkPool&) = delete;

  ~WorkPool() {
    {
      std::lock_guard lk(mutex_);
      stop_ = true;
    }
    start_cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  static std::size_t hardware_workers() noexcept {
    return std::max<std::size_t>(std::thread::hardware_concurrency(), 1);
  }

  std::size_t workers() const noexcept { return threads_.size() + 1; }

  /// Default chunk length for `count` work items: ceil(count / (8 * workers)).
  std::size_t default_chunk(std::size_t count) const noexcept {
    const std::size_t parts = 8 * workers();
    return std::max<std::size_t>((count + parts - 1) / parts, 1);
  }

  /// Calls fn(begin, end) over contiguous ranges covering [0, count). Ranges
  /// are disjoint; their execution order across workers is unspecified.
  template <typename Fn>
  void parallel_for(std::size_t count, std::size_t chunk, Fn&& fn) {
    if (count == 0) return;
    if (chunk == 0) chunk = default_chunk(count);
    const std::size_t chunks = (count + chunk - 1) / chunk;
    auto run_chunk = [&](std::size_t c) {
      const std::size_t begin = c * chunk;
      fn(begin, std::min(begin + chunk, count));
    };
    if (threads_.empty() || chunks == 1) {
      for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
      return;
    }

    std::lock_guard job_lock(job_mutex_);
    const std::function<void(std::size_t)> task = run_chunk;
    {
      std::lock_guard lk(mutex_);
      task_ = &task;
      num_chunks_ = chunks;
      next_.store(0, std::memory_order_relaxed);
      active_ = threads_.size();
      error_ = nullptr;
      ++generation_;
    }
    start_cv_.notify_all();
    drain();
    std::exception_ptr err;
    {
      std::unique_lock lk(mutex_);
      done_cv_.wait(lk, [this] { return active_ == 0; });
      task_ = nullptr;
      err = error_;
    }
    if (err) std::rethrow_exception(err);
  }

  template <typename Fn>
  void parallel_for(std::size_t count, Fn&& fn) {
    parallel_for(count, 0, std::forward<Fn>(fn));
  }

 private:
  void drain() {
    for (;;) {
      const std::size_t c = next_.fetch_add(1, std::memory_order_relaxed);
      if (c >= num_chunks_) return;
      try {
        (*task_)(c);
      } catch (...) {
        std::lock_guard lk(mutex_);
        if (!error_) error_ = std::current_exception();
      }
    }
  }

  void worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock lk(mutex_);
        start_cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      drain();
      {
        std::lock_guard lk(mutex_);
        if (--active_ == 0) done_cv_.notify_all();
      }
    }
  }

  std::vector<std::thread> threads_;
  std::mutex job_mutex_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::size_t num_chunks_ = 0;
  std::atomic<std::size_t> next_{0};
  std::size_t active_ = 0;
  std::uint64_t generation_ = 0;
  std::exception_ptr error_;
  bool stop_ = false;
};

/// Process-wide pool sized to the hardware.
inline WorkPool& default_pool() {
  static WorkPool pool;
  return pool;
}

/// Where and how finely a kernel distributes its work groups.
struct Executor {
  WorkPool* pool = nullptr;  // null: default_pool()
  std::size_t chunk = 0;     // groups per task; 0: pool default

  WorkPool& resolve() const { return pool ? *pool : default_pool(); }
};

}  // namespace bsrspmm
