#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

#include "stratsched/inline_task.hpp"
#include "stratsched/strategy.hpp"

namespace stratsched {

class FinishRegion;

enum class TaskState : std::uint8_t {
  kQueued,  // waiting in some storage
  kTaken,   // claimed for execution by exactly one worker
  kDead,    // dropped without executing (dead predicate fired)
};

// One spawned task. The record is shared between the owner's view, the
// publication log, and any thief views; the atomic state is the single
// claim point, so a record is consumed exactly once no matter how many
// views still reference it.
struct TaskRecord {
  StrategyDescriptor desc;
  InlineTask work;
  FinishRegion* region = nullptr;
  std::atomic<TaskState> state{TaskState::kQueued};
};

using TaskRecordPtr = std::shared_ptr<TaskRecord>;

// Per-place event counters. Each instance is written by one thread only and
// summed after workers quiesce. At quiescence the identity
//   pushes == pops + steals + dead_removed
// holds over the sums: every pushed record is consumed exactly one way.
struct PlaceMetrics {
  std::uint64_t pushes = 0;
  std::uint64_t pops = 0;
  std::uint64_t steals = 0;          // records taken from other places
  std::uint64_t steal_attempts = 0;  // steal calls, successful or not
  std::uint64_t call_conversions = 0;
  std::uint64_t dead_removed = 0;

  PlaceMetrics& operator+=(const PlaceMetrics& o) {
    pushes += o.pushes;
    pops += o.pops;
    steals += o.steals;
    steal_attempts += o.steal_attempts;
    call_conversions += o.call_conversions;
    dead_removed += o.dead_removed;
    return *this;
  }
};

// Records of one evaluating place, ordered by the grouped strategy
// semantics: records of each type sit in a heap ordered by that type's
// comparator, and a lazily rebuilt emission deck orders whole type groups by
// comparing group representatives (each group's current best record) at
// their lowest common ancestor. Groups drain contiguously; the deck is
// frozen between inserts, so pop order between pushes follows one consistent
// snapshot of the group ranking.
class OrderedView {
public:
  OrderedView(const StrategyRegistry* reg, const MachineTree* tree, PlaceId at);

  void insert(TaskRecordPtr rec);

  // Next record in deck order, removed from the view. Returns records
  // regardless of state; the caller claims or discards them.
  TaskRecordPtr pop_candidate();

  void clear();
  std::size_t entry_count() const noexcept { return entries_; }

private:
  bool heap_before(const TaskRecordPtr& a, const TaskRecordPtr& b) const;
  void rebuild_deck();
  // Emits the subtree rooted at `node` into `out`; returns the descriptor of
  // the subtree's best record (its representative), or nullptr if empty.
  const StrategyDescriptor* order_node(TypeId node, std::vector<TypeId>& out);

  const StrategyRegistry* reg_;
  PriorityContext ctx_;
  std::vector<std::vector<TaskRecordPtr>> heaps_;  // indexed by TypeId
  std::vector<TypeId> deck_;
  std::size_t cursor_ = 0;
  std::size_t entries_ = 0;
  bool dirty_ = false;
};

// Priority-aware task pool of one place.
//
// Concurrency contract: push/pop are owner-thread only and never block on
// thieves (publication uses try_lock with a private backlog). Thieves
// serialize on a per-victim mutex; under it each thief keeps a cached view
// of the victim's records, refreshed from a publication log past its
// high-water mark and discarded when the victim has pushed at least twice
// the cached size since caching. Takes are linearizable per record via the
// state CAS. The log compacts under the lock once at least half its entries
// are consumed, which bounds memory to about twice the live set.
class PriorityTaskStorage {
public:
  PriorityTaskStorage(PlaceId owner, PlaceId place_count, const StrategyRegistry& reg,
                      const MachineTree& tree);

  // Owner thread only.
  void push(TaskRecordPtr rec, PlaceMetrics& m);
  TaskRecordPtr pop(PlaceMetrics& m);

  // Any thread. Takes records in thief-priority order until their cumulative
  // weight reaches `target_weight`; returns them best-first.
  std::vector<TaskRecordPtr> steal(PlaceId thief, std::uint64_t target_weight, PlaceMetrics& m);

  // Stale-tolerant snapshots; never negative.
  std::uint64_t total_queued_weight() const noexcept {
    return weight_.load(std::memory_order_relaxed);
  }
  std::size_t queued_count() const noexcept { return live_.load(std::memory_order_relaxed); }
  std::uint64_t push_count() const noexcept {
    return push_count_.load(std::memory_order_relaxed);
  }

  PlaceId owner() const noexcept { return owner_; }

private:
  struct ThiefView {
    std::unique_ptr<OrderedView> view;
    std::uint64_t hwm = 0;        // log index up to which records were cached
    std::uint64_t epoch = ~std::uint64_t{0};
    std::uint64_t pushes_at = 0;  // storage push_count when last cached
    std::size_t size_at = 0;      // cached entry count at that point
  };

  void account_consumed(const TaskRecord& rec);
  // After a successful kQueued -> kDead transition: adjusts counters and
  // completes the record's finish region, since the task will never run.
  void retire_dead(const TaskRecord& rec, PlaceMetrics& m);
  void flush_backlog_locked();
  void maybe_compact_locked();

  PlaceId owner_;
  const StrategyRegistry* reg_;
  const MachineTree* tree_;

  OrderedView owner_view_;
  std::vector<TaskRecordPtr> backlog_;  // pushed but not yet published

  std::mutex mtx_;  // guards log_, epoch_, thief_views_
  std::vector<TaskRecordPtr> log_;
  std::uint64_t epoch_ = 0;
  std::vector<ThiefView> thief_views_;

  std::atomic<std::uint64_t> weight_{0};
  std::atomic<std::int64_t> live_{0};
  std::atomic<std::uint64_t> push_count_{0};
};

}  // namespace stratsched
