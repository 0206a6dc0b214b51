#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "stratsched/kernels/common.hpp"
#include "stratsched/scheduler.hpp"

namespace stratsched::kernels {

// Blocked parallel inclusive prefix sum. Each block is one task. A shared
// counter tracks the next block to be finalized in order: the task owning
// that block folds the running total in during its single scan; any other
// block does a local scan first and gets the missing offset added in a
// second pass once its predecessors are done. One worker processing blocks
// in ascending order never needs a second pass.
//
// The kernel is reusable inside an existing scheduler run (see launch), or
// standalone via prefix_sum().
class PrefixSumKernel {
public:
  // Scans `data` in place. block_size >= 1.
  PrefixSumKernel(std::vector<std::int64_t>& data, std::size_t block_size);

  TypeId register_with(StrategyRegistry& reg);

  // Spawns all block tasks; call on a worker inside a finish scope (or a
  // scheduler entry). With KernelMode::kStrategy the spawning place prefers
  // ascending block order and every other place descending order.
  void launch(KernelMode mode);

  std::uint64_t second_pass_blocks() const {
    return second_pass_.load(std::memory_order_relaxed);
  }
  std::size_t block_count() const { return blocks_; }

private:
  friend struct PrefixTaskAccess;

  void process_block(std::size_t index);
  void advance();

  std::vector<std::int64_t>* data_;
  std::size_t block_size_;
  std::size_t blocks_;
  TypeId type_ = kRootStrategy;
  std::atomic<std::size_t> counter_{0};
  std::unique_ptr<std::atomic<std::uint8_t>[]> state_;  // 0 untouched, 1 local scan done, 2 claimed
  std::vector<std::int64_t> cumulative_;                // global total through block i
  std::atomic<std::uint64_t> second_pass_{0};
};

struct PrefixSumResult {
  std::uint64_t second_pass_blocks = 0;
  double wall_ms = 0.0;
};

// Standalone run: builds a registry and scheduler, scans data in place.
PrefixSumResult prefix_sum(std::vector<std::int64_t>& data, std::size_t block_size,
                           const SchedulerConfig& config, KernelMode mode,
                           PlaceMetrics* metrics_out = nullptr);

// Testing oracle.
std::vector<std::int64_t> sequential_prefix(std::vector<std::int64_t> data);

}  // namespace stratsched::kernels
