#include "stratsched/task_storage.hpp"

#include <algorithm>
#include <cassert>

#include "stratsched/finish_region.hpp"

namespace stratsched {

OrderedView::OrderedView(const StrategyRegistry* reg, const MachineTree* tree, PlaceId at)
    : reg_(reg), ctx_{at, tree}, heaps_(reg->type_count()) {}

bool OrderedView::heap_before(const TaskRecordPtr& a, const TaskRecordPtr& b) const {
  // std heap functions keep the "largest" element on top; the record that
  // runs first must win, so a < b iff a runs later.
  return reg_->compare_at(a->desc.type, b->desc, a->desc, ctx_) == std::weak_ordering::less;
}

void OrderedView::insert(TaskRecordPtr rec) {
  auto& heap = heaps_[rec->desc.type];
  heap.push_back(std::move(rec));
  std::push_heap(heap.begin(), heap.end(),
                 [this](const TaskRecordPtr& a, const TaskRecordPtr& b) { return heap_before(a, b); });
  ++entries_;
  dirty_ = true;
}

const StrategyDescriptor* OrderedView::order_node(TypeId node, std::vector<TypeId>& out) {
  struct Unit {
    std::vector<TypeId> emission;
    const StrategyDescriptor* rep;
  };
  std::vector<Unit> units;
  if (!heaps_[node].empty()) {
    units.push_back(Unit{{node}, &heaps_[node].front()->desc});
  }
  for (TypeId child : reg_->children(node)) {
    std::vector<TypeId> sub;
    if (const StrategyDescriptor* rep = order_node(child, sub)) {
      units.push_back(Unit{std::move(sub), rep});
    }
  }
  if (units.empty()) return nullptr;
  // Group ranking: units ordered by comparing their representatives at this
  // node. Insertion sort; type counts are small.
  for (std::size_t i = 1; i < units.size(); ++i) {
    Unit u = std::move(units[i]);
    std::size_t j = i;
    while (j > 0 &&
           reg_->compare_at(node, *u.rep, *units[j - 1].rep, ctx_) == std::weak_ordering::less) {
      units[j] = std::move(units[j - 1]);
      --j;
    }
    units[j] = std::move(u);
  }
  for (auto& u : units) out.insert(out.end(), u.emission.begin(), u.emission.end());
  return units.front().rep;
}

void OrderedView::rebuild_deck() {
  deck_.clear();
  cursor_ = 0;
  dirty_ = false;
  order_node(kRootStrategy, deck_);
}

TaskRecordPtr OrderedView::pop_candidate() {
  if (entries_ == 0) return nullptr;
  if (dirty_) rebuild_deck();
  while (cursor_ < deck_.size()) {
    auto& heap = heaps_[deck_[cursor_]];
    if (heap.empty()) {
      ++cursor_;
      continue;
    }
    std::pop_heap(heap.begin(), heap.end(),
                  [this](const TaskRecordPtr& a, const TaskRecordPtr& b) { return heap_before(a, b); });
    TaskRecordPtr rec = std::move(heap.back());
    heap.pop_back();
    --entries_;
    return rec;
  }
  return nullptr;
}

void OrderedView::clear() {
  for (auto& heap : heaps_) heap.clear();
  deck_.clear();
  cursor_ = 0;
  entries_ = 0;
  dirty_ = false;
}

PriorityTaskStorage::PriorityTaskStorage(PlaceId owner, PlaceId place_count,
                                         const StrategyRegistry& reg, const MachineTree& tree)
    : owner_(owner),
      reg_(&reg),
      tree_(&tree),
      owner_view_(&reg, &tree, owner),
      thief_views_(place_count) {}

void PriorityTaskStorage::account_consumed(const TaskRecord& rec) {
  weight_.fetch_sub(rec.desc.transitive_weight, std::memory_order_relaxed);
  live_.fetch_sub(1, std::memory_order_relaxed);
}

void PriorityTaskStorage::retire_dead(const TaskRecord& rec, PlaceMetrics& m) {
  account_consumed(rec);
  m.dead_removed += 1;
  // The task will never execute, so its region must not wait for it.
  if (rec.region) rec.region->complete_one();
}

void PriorityTaskStorage::flush_backlog_locked() {
  for (auto& rec : backlog_) log_.push_back(std::move(rec));
  backlog_.clear();
}

void PriorityTaskStorage::maybe_compact_locked() {
  if (log_.size() < 64) return;
  const auto live = static_cast<std::uint64_t>(std::max<std::int64_t>(0, live_.load()));
  if (live * 2 > log_.size()) return;
  std::vector<TaskRecordPtr> kept;
  kept.reserve(live + 8);
  for (auto& rec : log_) {
    if (rec && rec->state.load(std::memory_order_relaxed) == TaskState::kQueued) {
      kept.push_back(std::move(rec));
    }
  }
  log_.swap(kept);
  ++epoch_;  // all cached thief high-water marks are now meaningless
}

void PriorityTaskStorage::push(TaskRecordPtr rec, PlaceMetrics& m) {
  // Counters first: a record visible to thieves must already be accounted,
  // so the weight/live snapshots can be stale but never go negative.
  weight_.fetch_add(rec->desc.transitive_weight, std::memory_order_relaxed);
  live_.fetch_add(1, std::memory_order_relaxed);
  push_count_.fetch_add(1, std::memory_order_relaxed);
  m.pushes += 1;
  owner_view_.insert(rec);
  backlog_.push_back(std::move(rec));
  if (mtx_.try_lock()) {
    flush_backlog_locked();
    maybe_compact_locked();
    mtx_.unlock();
  }
}

TaskRecordPtr PriorityTaskStorage::pop(PlaceMetrics& m) {
  if (!backlog_.empty() && mtx_.try_lock()) {
    flush_backlog_locked();
    mtx_.unlock();
  }
  while (TaskRecordPtr rec = owner_view_.pop_candidate()) {
    if (rec->state.load(std::memory_order_relaxed) != TaskState::kQueued) continue;
    TaskState expect = TaskState::kQueued;
    if (reg_->dead(rec->desc)) {
      if (rec->state.compare_exchange_strong(expect, TaskState::kDead)) retire_dead(*rec, m);
      continue;
    }
    if (rec->state.compare_exchange_strong(expect, TaskState::kTaken)) {
      account_consumed(*rec);
      m.pops += 1;
      return rec;
    }
  }
  return nullptr;
}

std::vector<TaskRecordPtr> PriorityTaskStorage::steal(PlaceId thief, std::uint64_t target_weight,
                                                      PlaceMetrics& m) {
  std::vector<TaskRecordPtr> out;
  if (target_weight == 0) return out;
  std::lock_guard<std::mutex> lk(mtx_);
  m.steal_attempts += 1;

  ThiefView& tv = thief_views_.at(thief);
  if (!tv.view) tv.view = std::make_unique<OrderedView>(reg_, tree_, thief);
  if (tv.epoch != epoch_) {
    tv.view->clear();
    tv.hwm = 0;
    tv.epoch = epoch_;
  }
  if (live_.load(std::memory_order_relaxed) <= 0) {
    // Observed empty: drop the cache and restart the high-water mark at the
    // current end of the log.
    tv.view->clear();
    tv.hwm = log_.size();
    tv.pushes_at = push_count_.load(std::memory_order_relaxed);
    tv.size_at = 0;
    return out;
  }
  const std::uint64_t pushes_now = push_count_.load(std::memory_order_relaxed);
  if (pushes_now - tv.pushes_at >= 2 * std::max<std::uint64_t>(1, tv.size_at)) {
    // The victim outpaced the cache badly enough that it is cheaper to
    // rebuild the view than to patch it up.
    tv.view->clear();
    tv.hwm = 0;
  }
  for (std::size_t i = tv.hwm; i < log_.size(); ++i) {
    const TaskRecordPtr& rec = log_[i];
    if (!rec || rec->state.load(std::memory_order_relaxed) != TaskState::kQueued) continue;
    TaskState expect = TaskState::kQueued;
    if (reg_->dead(rec->desc)) {
      if (rec->state.compare_exchange_strong(expect, TaskState::kDead)) retire_dead(*rec, m);
      continue;
    }
    tv.view->insert(rec);
  }
  tv.hwm = log_.size();
  tv.pushes_at = pushes_now;

  std::uint64_t got = 0;
  while (got < target_weight) {
    TaskRecordPtr rec = tv.view->pop_candidate();
    if (!rec) break;
    if (rec->state.load(std::memory_order_relaxed) != TaskState::kQueued) continue;
    TaskState expect = TaskState::kQueued;
    if (reg_->dead(rec->desc)) {
      if (rec->state.compare_exchange_strong(expect, TaskState::kDead)) retire_dead(*rec, m);
      continue;
    }
    if (rec->state.compare_exchange_strong(expect, TaskState::kTaken)) {
      account_consumed(*rec);
      got += rec->desc.transitive_weight;
      out.push_back(std::move(rec));
    }
  }
  tv.size_at = tv.view->entry_count();
  m.steals += out.size();
  maybe_compact_locked();
  return out;
}

}  // namespace stratsched
