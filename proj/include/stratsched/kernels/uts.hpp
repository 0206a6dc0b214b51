#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "stratsched/kernels/common.hpp"
#include "stratsched/scheduler.hpp"

namespace stratsched::kernels {

// Unbalanced tree search over a tree that exists only as a deterministic
// function of a 64-bit root state: every node's child count and child states
// are derived from fixed bit-exact hashing, so the same parameters traverse
// the exact same tree on any thread count. Child counts follow a geometric
// law whose expected branching b(depth) = b0 * (1 - depth / h_max) shrinks
// linearly with depth.
// The defaults yield a tree of 3,958,713 nodes — a few million tasks, heavy
// enough to exercise stealing yet done in seconds.
struct UTSParams {
  std::uint64_t root_state = 11;
  double b0 = 4.1;         // expected branching at the root
  unsigned h_max = 20;     // maximum height; nodes at h_max are leaves
  unsigned m_max = 16;     // hard cap on children per node
  bool allow_conversion = true;
};

// The fixed 64-bit finalizer used for all tree derivation (the classic
// xor-shift-multiply mixer with constants 0xbf58476d1ce4e5b9 and
// 0x94d049bb133111eb; increment constant 0x9e3779b97f4a7c15).
std::uint64_t uts_mix64(std::uint64_t x);

// Child states of a node; empty at depth >= h_max. Deterministic.
std::vector<std::uint64_t> uts_children(std::uint64_t state, unsigned depth,
                                        const UTSParams& params);

// Reusable inside an existing scheduler run; standalone via uts_run().
class UTSKernel {
public:
  explicit UTSKernel(const UTSParams& params);

  TypeId register_with(StrategyRegistry& reg);

  // Spawns the root task; call on a worker inside a finish scope. Task
  // weights are 2^min(h_max - depth, 30).
  void launch(KernelMode mode);

  std::uint64_t node_count() const { return nodes_.load(std::memory_order_relaxed); }

private:
  void visit(std::uint64_t state, unsigned depth);
  void spawn_child(std::uint64_t state, unsigned depth);

  UTSParams params_;
  KernelMode mode_ = KernelMode::kStrategy;
  TypeId type_ = kRootStrategy;
  std::atomic<std::uint64_t> nodes_{0};
};

struct UTSResult {
  std::uint64_t node_count = 0;
  double wall_ms = 0.0;
};

UTSResult uts_run(const UTSParams& params, const SchedulerConfig& config, KernelMode mode,
                  PlaceMetrics* metrics_out = nullptr);

// Sequential traversal (no scheduler) for golden node counts in tests.
std::uint64_t uts_count_sequential(const UTSParams& params);

}  // namespace stratsched::kernels
