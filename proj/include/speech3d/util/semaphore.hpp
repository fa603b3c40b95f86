#pragma once

#include <condition_variable>
#include <cstddef>
#include <mutex>

namespace speech3d::util {

// Counting semaphore with a runtime capacity and an in-flight high-water mark.
class Semaphore {
 public:
  explicit Semaphore(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  void acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return in_use_ < capacity_; });
    ++in_use_;
    if (in_use_ > peak_) peak_ = in_use_;
  }

  void release() {
    {
      std::lock_guard lock(mutex_);
      --in_use_;
    }
    cv_.notify_one();
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t peak() const {
    std::lock_guard lock(mutex_);
    return peak_;
  }

 private:
  const std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t in_use_ = 0;
  std::size_t peak_ = 0;
};

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(Semaphore& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  Semaphore& s_;
};

}  // namespace speech3d::util
