#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>

namespace stratsched {

// X10-style finish scope: counts outstanding tasks attributed to the scope
// and holds the first exception any of them raised. The opening worker helps
// schedule until the count drains, then rethrows.
class FinishRegion {
public:
  explicit FinishRegion(FinishRegion* parent = nullptr) noexcept : parent_(parent) {}
  FinishRegion(const FinishRegion&) = delete;
  FinishRegion& operator=(const FinishRegion&) = delete;

  FinishRegion* parent() const noexcept { return parent_; }

  void add_pending() noexcept { pending_.fetch_add(1, std::memory_order_relaxed); }

  // Called exactly once per pending task: after its body ran, or when it was
  // removed dead. The release pairs with the acquire in pending().
  void complete_one() noexcept { pending_.fetch_sub(1, std::memory_order_release); }

  std::uint64_t pending() const noexcept { return pending_.load(std::memory_order_acquire); }

  // First exception wins; later ones are dropped after their tasks drained.
  void set_exception(std::exception_ptr ep) noexcept {
    std::lock_guard<std::mutex> lk(mtx_);
    if (!exception_) exception_ = std::move(ep);
  }

  void rethrow_if_any() {
    std::exception_ptr ep;
    {
      std::lock_guard<std::mutex> lk(mtx_);
      ep = exception_;
    }
    if (ep) std::rethrow_exception(ep);
  }

private:
  FinishRegion* parent_;
  std::atomic<std::uint64_t> pending_{0};
  std::mutex mtx_;
  std::exception_ptr exception_;
};

}  // namespace stratsched
