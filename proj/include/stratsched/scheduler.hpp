#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <type_traits>
#include <vector>

#include "stratsched/finish_region.hpp"
#include "stratsched/machine_tree.hpp"
#include "stratsched/strategy.hpp"
#include "stratsched/task_storage.hpp"

namespace stratsched {

struct SchedulerConfig {
  unsigned thread_count = 1;
  // Machine tree fanouts; empty means the default two-level topology for the
  // thread count. When given, the (possibly trimmed) leaf count must equal
  // thread_count.
  std::vector<unsigned> topology;
  // K in the spawn-to-call rule: convert when the task's transitive weight is
  // at most max(1, local queued weight / K).
  unsigned call_conversion_divisor = 64;
  // Failed steal rounds back off from roughly min to max microseconds.
  unsigned steal_backoff_min_us = 1;
  unsigned steal_backoff_max_us = 512;
  std::uint64_t rng_seed = 0x5eed;
  bool pin_threads = false;  // best-effort CPU affinity, place i -> core i mod N
  bool record_trace = false;  // execution trace; requires thread_count == 1
  // Test instrumentation, called after each successful steal with the stolen
  // weights best-first and the target the thief aimed for.
  std::function<void(PlaceId thief, PlaceId victim, const std::vector<std::uint64_t>& weights,
                     std::uint64_t target)>
      steal_observer;
};

struct TraceEvent {
  enum class Kind : std::uint8_t {
    kSpawn,    // task queued
    kConvert,  // spawn converted to a plain call
    kBegin,    // task body starts
    kEnd,      // task body finished
  };
  Kind kind;
  PlaceId place;       // where the event happened
  PlaceId task_place;  // task identity: spawn place + seq
  std::uint64_t task_seq;
};

// True when the spawn should run as a plain call instead of being queued:
// the task allows it and its weight is small next to the work already queued
// here, so the queue loses no parallelism worth stealing.
bool convert_decision(const StrategyDescriptor& d, std::uint64_t local_queued_weight,
                      std::size_t local_queued_count, unsigned divisor);

namespace detail {
struct Place;
void spawn_record(StrategyDescriptor desc, InlineTask work);
void finish_impl(void (*fn)(void*), void* ctx);
}  // namespace detail

// Work-stealing runtime: one storage per place (worker thread), victims
// probed nearest-first, steals target half the victim's queued weight, and
// each task's strategy controls ordering, steal appeal, conversion, and
// dead-task elimination. Construct, call run() once, read metrics.
class Scheduler {
public:
  Scheduler(SchedulerConfig config, const StrategyRegistry& registry);
  ~Scheduler();
  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  // Executes `entry` on place 0 inside the root finish scope, schedules
  // until every transitively spawned task completed, then joins the workers.
  // Rethrows the first exception raised by entry or any task.
  void run(std::function<void()> entry);

  const MachineTree& machine() const noexcept { return machine_; }
  PlaceId place_count() const noexcept;
  PlaceMetrics metrics() const;       // summed over places; valid after run()
  const PlaceMetrics& place_metrics(PlaceId p) const;
  const std::vector<TraceEvent>& trace() const noexcept { return trace_; }

private:
  friend struct detail::Place;
  friend void detail::spawn_record(StrategyDescriptor, InlineTask);
  friend void detail::finish_impl(void (*)(void*), void*);

  void worker_main(detail::Place& place);
  bool try_step(detail::Place& place);
  bool steal_round(detail::Place& place);
  void execute(detail::Place& place, const TaskRecordPtr& rec);
  void idle_wait(detail::Place& place, unsigned& misses);
  void record(TraceEvent::Kind kind, PlaceId at, const StrategyDescriptor& d);

  SchedulerConfig config_;
  const StrategyRegistry* registry_;
  MachineTree machine_;
  std::vector<std::unique_ptr<detail::Place>> places_;
  std::atomic<bool> stop_{false};
  bool ran_ = false;
  std::vector<TraceEvent> trace_;
};

// Spawns a task carrying `desc` from the current worker. The descriptor's
// spawn place and seq are assigned here; the spawn may run inline when the
// conversion rule fires. Must be called on a worker inside run().
template <class F>
void spawn_s(StrategyDescriptor desc, F&& body) {
  detail::spawn_record(std::move(desc), InlineTask(std::forward<F>(body)));
}

// Runs `body`, then schedules until every task spawned inside this scope
// (transitively, minus inner finish scopes that already waited) completed.
template <class F>
void finish(F&& body) {
  using Fn = std::remove_reference_t<F>;
  detail::finish_impl([](void* p) { (*static_cast<Fn*>(p))(); }, std::addressof(body));
}

// Place of the calling worker; throws when not inside run().
PlaceId current_place();

// Single-threaded run with a fixed seed and full execution trace: the same
// scheduler code path, but every decision is deterministic, so tests can
// assert exact execution order.
struct DeterministicRun {
  std::vector<TraceEvent> trace;
  PlaceMetrics metrics;
};
DeterministicRun run_deterministic(const StrategyRegistry& registry,
                                   std::function<void()> entry, std::uint64_t seed);

}  // namespace stratsched
