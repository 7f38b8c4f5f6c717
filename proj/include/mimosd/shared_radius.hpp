#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>

namespace mimosd {

/// Squared sphere radius shared by concurrent searchers.
///
/// Reads are lock-free. offer() is a linearizable min-update: publications are
/// serialized so the publication counter orders them consistently with their
/// values (strictly decreasing in publication order).
class SharedRadius {
 public:
  explicit SharedRadius(double radius_sq) : value_(radius_sq) {}

  double load() const { return value_.load(std::memory_order_acquire); }

  // Lowers the radius to `candidate` if smaller. On success stores the
  // publication number (1-based) in *pub and returns true.
  bool offer(double candidate, std::uint64_t* pub = nullptr) {
    if (!(candidate < load())) return false;
    std::lock_guard lock(mutex_);
    if (!(candidate < value_.load(std::memory_order_relaxed))) return false;
    value_.store(candidate, std::memory_order_release);
    ++publications_;
    if (pub) *pub = publications_;
    return true;
  }

  std::uint64_t publications() const {
    std::lock_guard lock(mutex_);
    return publications_;
  }

 private:
  std::atomic<double> value_;
  mutable std::mutex mutex_;
  std::uint64_t publications_ = 0;
};

// Single-threaded counterpart with the same interface.
class LocalRadius {
 public:
  explicit LocalRadius(double radius_sq) : value_(radius_sq) {}

  double load() const { return value_; }
  bool offer(double candidate, std::uint64_t* pub = nullptr) {
    if (!(candidate < value_)) return false;
    value_ = candidate;
    ++publications_;
    if (pub) *pub = publications_;
    return true;
  }

 private:
  double value_;
  std::uint64_t publications_ = 0;
};

}  // namespace mimosd
