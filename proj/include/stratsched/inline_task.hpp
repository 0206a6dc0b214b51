#pragma once

#include <cassert>
#include <cstddef>
#include <new>
#include <type_traits>
#include <utility>

namespace stratsched {

// Move-only callable with fixed inline capacity and no heap fallback. Task
// records are allocated on hot paths, so closures must stay small; capturing
// more than kCapacity bytes is a compile error rather than a silent
// allocation.
class InlineTask {
public:
  static constexpr std::size_t kCapacity = 64;

  InlineTask() = default;

  template <class F, class = std::enable_if_t<!std::is_same_v<std::decay_t<F>, InlineTask>>>
  InlineTask(F&& f) {  // NOLINT: implicit by design, mirrors std::function
    using Fn = std::decay_t<F>;
    static_assert(sizeof(Fn) <= kCapacity, "task closure too large for inline storage");
    static_assert(alignof(Fn) <= alignof(std::max_align_t), "task closure over-aligned");
    ::new (static_cast<void*>(buf_)) Fn(std::forward<F>(f));
    vt_ = vtable_for<Fn>();
  }

  InlineTask(InlineTask&& other) noexcept { move_from(other); }
  InlineTask& operator=(InlineTask&& other) noexcept {
    if (this != &other) {
      reset();
      move_from(other);
    }
    return *this;
  }
  InlineTask(const InlineTask&) = delete;
  InlineTask& operator=(const InlineTask&) = delete;
  ~InlineTask() { reset(); }

  explicit operator bool() const noexcept { return vt_ != nullptr; }

  void operator()() {
    assert(vt_);
    vt_->invoke(buf_);
  }

  void reset() noexcept {
    if (vt_) {
      vt_->destroy(buf_);
      vt_ = nullptr;
    }
  }

private:
  struct VTable {
    void (*invoke)(void*);
    void (*relocate)(void* from, void* to);  // move-construct into `to`, destroy `from`
    void (*destroy)(void*);
  };

  template <class Fn>
  static const VTable* vtable_for() {
    static constexpr VTable vt{
        [](void* p) { (*static_cast<Fn*>(p))(); },
        [](void* from, void* to) {
          ::new (to) Fn(std::move(*static_cast<Fn*>(from)));
          static_cast<Fn*>(from)->~Fn();
        },
        [](void* p) { static_cast<Fn*>(p)->~Fn(); }};
    return &vt;
  }

  void move_from(InlineTask& other) noexcept {
    vt_ = other.vt_;
    if (vt_) {
      vt_->relocate(other.buf_, buf_);
      other.vt_ = nullptr;
    }
  }

  alignas(std::max_align_t) unsigned char buf_[kCapacity] = {};
  const VTable* vt_ = nullptr;
};

}  // namespace stratsched
