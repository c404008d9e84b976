#pragma once

// Index-range execution for the distributed runtime. The reference executor
// runs indices in order on the calling thread; the concurrent executor hands
// them to a fixed pool of workers and returns once every index is done, which
// is the barrier between checkerboard phases and pipeline stages.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace pm {

class WorkerPool {
 public:
  explicit WorkerPool(unsigned workers) {
    threads_.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) threads_.emplace_back([this] { worker_loop(); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    {
      std::lock_guard lock(m_);
      stop_ = true;
    }
    work_cv_.notify_all();
    for (std::thread& t : threads_) t.join();
  }

  unsigned size() const { return static_cast<unsigned>(threads_.size()); }

  /// Runs body(i) for i in [0, n). The calling thread participates. If any
  /// call throws, the exception of the lowest failing index is rethrown.
  void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body) {
    if (n <= 0) return;
    std::lock_guard serial(dispatch_);
    {
      std::lock_guard lock(m_);
      body_ = &body;
      n_ = n;
      next_.store(0);
      busy_ = static_cast<unsigned>(threads_.size());
      error_ = nullptr;
      error_index_ = n;
      ++generation_;
    }
    work_cv_.notify_all();
    drain();
    std::unique_lock lock(m_);
    done_cv_.wait(lock, [this] { return busy_ == 0; });
    body_ = nullptr;
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void drain() {
    for (std::int64_t i = next_.fetch_add(1); i < n_; i = next_.fetch_add(1)) {
      try {
        (*body_)(i);
      } catch (...) {
        std::lock_guard lock(m_);
        if (i < error_index_) {
          error_index_ = i;
          error_ = std::current_exception();
        }
      }
    }
  }

  void worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(m_);
        work_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      drain();
      {
        std::lock_guard lock(m_);
        if (--busy_ == 0) done_cv_.notify_one();
      }
    }
  }

  std::vector<std::thread> threads_;
  std::mutex dispatch_;
  std::mutex m_;
  std::condition_variable work_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::int64_t)>* body_ = nullptr;
  std::int64_t n_ = 0;
  std::atomic<std::int64_t> next_{0};
  unsigned busy_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
  std::int64_t error_index_ = 0;
};

enum class ExecMode { ReferenceSequentialPhases, ConcurrentWorkers };

inline const char* to_string(ExecMode m) {
  return m == ExecMode::ReferenceSequentialPhases ? "reference" : "concurrent";
}

/// Worker count for concurrent mode: PM_THREADS if set, else the hardware
/// concurrency, never less than 2.
inline unsigned default_worker_count() {
  if (const char* env = std::getenv("PM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(2u, std::thread::hardware_concurrency());
}

class Executor {
 public:
  Executor() = default;
  explicit Executor(ExecMode mode, unsigned workers = 0) : mode_(mode) {
    if (mode_ == ExecMode::ConcurrentWorkers) {
      const unsigned n = workers ? workers : default_worker_count();
      // the calling thread is one of the workers
      pool_ = std::make_shared<WorkerPool>(n > 1 ? n - 1 : 1);
    }
  }

  ExecMode mode() const { return mode_; }

  template <class F>
  void for_each(std::int64_t n, F&& body) const {
    if (!pool_) {
      for (std::int64_t i = 0; i < n; ++i) body(i);
      return;
    }
    const std::function<void(std::int64_t)> fn = std::forward<F>(body);
    pool_->parallel_for(n, fn);
  }

 private:
  ExecMode mode_ = ExecMode::ReferenceSequentialPhases;
  std::shared_ptr<WorkerPool> pool_;
};

}  // namespace pm
