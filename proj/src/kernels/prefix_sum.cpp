#include "stratsched/kernels/prefix_sum.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace stratsched::kernels {

namespace {
constexpr std::uint8_t kUntouched = 0;
constexpr std::uint8_t kLocalDone = 1;
constexpr std::uint8_t kClaimed = 2;
}  // namespace

PrefixSumKernel::PrefixSumKernel(std::vector<std::int64_t>& data, std::size_t block_size)
    : data_(&data), block_size_(block_size) {
  if (block_size_ == 0) throw std::invalid_argument("prefix sum: block_size must be >= 1");
  blocks_ = (data.size() + block_size_ - 1) / block_size_;
  state_ = std::make_unique<std::atomic<std::uint8_t>[]>(blocks_);
  for (std::size_t i = 0; i < blocks_; ++i) state_[i].store(kUntouched, std::memory_order_relaxed);
  cumulative_.assign(blocks_, 0);
}

TypeId PrefixSumKernel::register_with(StrategyRegistry& reg) {
  type_ = reg.register_type(
      kRootStrategy, "prefix_block",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext& ctx) {
        // All blocks are spawned from one place. There, ascending block order
        // feeds the in-order fast path; everywhere else descending order
        // keeps thieves off the blocks the spawner needs next.
        if (ctx.local(a)) return std::weak_ordering(a.payload.slot[0] <=> b.payload.slot[0]);
        return std::weak_ordering(b.payload.slot[0] <=> a.payload.slot[0]);
      });
  return type_;
}

void PrefixSumKernel::process_block(std::size_t index) {
  std::vector<std::int64_t>& data = *data_;
  const std::size_t begin = index * block_size_;
  const std::size_t end = std::min(data.size(), begin + block_size_);
  std::uint8_t expect = kUntouched;
  if (counter_.load(std::memory_order_acquire) == index &&
      state_[index].compare_exchange_strong(expect, kClaimed, std::memory_order_acq_rel,
                                            std::memory_order_relaxed)) {
    // In-order path: predecessors are final, fold their total in one scan.
    std::int64_t run = index == 0 ? 0 : cumulative_[index - 1];
    for (std::size_t k = begin; k < end; ++k) {
      run += data[k];
      data[k] = run;
    }
    cumulative_[index] = run;
    counter_.store(index + 1, std::memory_order_release);
  } else {
    // Out of order: local scan now, the missing offset arrives via advance().
    std::int64_t run = 0;
    for (std::size_t k = begin; k < end; ++k) {
      run += data[k];
      data[k] = run;
    }
    state_[index].store(kLocalDone, std::memory_order_release);
  }
  advance();
}

void PrefixSumKernel::advance() {
  std::vector<std::int64_t>& data = *data_;
  for (;;) {
    const std::size_t j = counter_.load(std::memory_order_acquire);
    if (j >= blocks_) return;
    std::uint8_t expect = kLocalDone;
    if (!state_[j].compare_exchange_strong(expect, kClaimed, std::memory_order_acq_rel,
                                           std::memory_order_relaxed)) {
      return;  // next block untouched or someone else owns the frontier
    }
    const std::int64_t carry = j == 0 ? 0 : cumulative_[j - 1];
    const std::size_t begin = j * block_size_;
    const std::size_t end = std::min(data.size(), begin + block_size_);
    for (std::size_t k = begin; k < end; ++k) data[k] += carry;
    cumulative_[j] = data[end - 1];
    counter_.store(j + 1, std::memory_order_release);
    second_pass_.fetch_add(1, std::memory_order_relaxed);
  }
}

void PrefixSumKernel::launch(KernelMode mode) {
  for (std::size_t i = 0; i < blocks_; ++i) {
    StrategyDescriptor d;
    if (mode == KernelMode::kStrategy) {
      d.type = type_;
      d.payload.slot[0] = static_cast<std::int64_t>(i);
    }
    PrefixSumKernel* self = this;
    spawn_s(d, [self, i] { self->process_block(i); });
  }
}

PrefixSumResult prefix_sum(std::vector<std::int64_t>& data, std::size_t block_size,
                           const SchedulerConfig& config, KernelMode mode,
                           PlaceMetrics* metrics_out) {
  StrategyRegistry reg;
  PrefixSumKernel kernel(data, block_size);
  kernel.register_with(reg);
  Scheduler sched(config, reg);
  const auto start = std::chrono::steady_clock::now();
  sched.run([&] { kernel.launch(mode); });
  PrefixSumResult result;
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  result.second_pass_blocks = kernel.second_pass_blocks();
  if (metrics_out) *metrics_out = sched.metrics();
  return result;
}

std::vector<std::int64_t> sequential_prefix(std::vector<std::int64_t> data) {
  std::int64_t run = 0;
  for (auto& x : data) {
    run += x;
    x = run;
  }
  return data;
}

}  // namespace stratsched::kernels
