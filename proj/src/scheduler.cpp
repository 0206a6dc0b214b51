#include "stratsched/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <stdexcept>
#include <thread>

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif

namespace stratsched {

namespace detail {

struct Place {
  PlaceId id = 0;
  Scheduler* sched = nullptr;
  std::unique_ptr<PriorityTaskStorage> storage;
  std::mt19937_64 rng;
  PlaceMetrics metrics;
  std::uint64_t next_seq = 0;
  FinishRegion* current_region = nullptr;
};

namespace {
thread_local Place* tl_place = nullptr;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}
}  // namespace

}  // namespace detail

bool convert_decision(const StrategyDescriptor& d, std::uint64_t local_queued_weight,
                      std::size_t /*local_queued_count*/, unsigned divisor) {
  if (!d.allow_call_conversion) return false;
  const std::uint64_t threshold = std::max<std::uint64_t>(1, local_queued_weight / divisor);
  return d.transitive_weight <= threshold;
}

namespace {

MachineTree build_machine(const SchedulerConfig& config) {
  if (config.thread_count == 0) throw std::invalid_argument("thread_count must be positive");
  if (config.topology.empty()) return MachineTree::default_for_threads(config.thread_count);
  MachineTree tree(config.topology);
  if (tree.leaf_count() != config.thread_count) {
    std::uint64_t full = 1;
    for (unsigned f : config.topology) full *= f;
    if (full < config.thread_count) {
      throw std::invalid_argument("topology has fewer leaves than threads");
    }
    return MachineTree(config.topology, config.thread_count);
  }
  return tree;
}

void pin_to_core(unsigned core) {
#if defined(__linux__)
  cpu_set_t set;
  CPU_ZERO(&set);
  const unsigned n = std::max(1u, std::thread::hardware_concurrency());
  CPU_SET(core % n, &set);
  (void)pthread_setaffinity_np(pthread_self(), sizeof(set), &set);  // best effort
#else
  (void)core;
#endif
}

}  // namespace

Scheduler::Scheduler(SchedulerConfig config, const StrategyRegistry& registry)
    : config_(std::move(config)), registry_(&registry), machine_(build_machine(config_)) {
  if (config_.record_trace && config_.thread_count != 1) {
    throw std::invalid_argument("trace recording requires a single thread");
  }
  if (config_.call_conversion_divisor == 0) {
    throw std::invalid_argument("call_conversion_divisor must be positive");
  }
  const PlaceId n = machine_.leaf_count();
  places_.reserve(n);
  for (PlaceId i = 0; i < n; ++i) {
    auto p = std::make_unique<detail::Place>();
    p->id = i;
    p->sched = this;
    p->storage = std::make_unique<PriorityTaskStorage>(i, n, *registry_, machine_);
    p->rng.seed(detail::mix_seed(config_.rng_seed, i));
    places_.push_back(std::move(p));
  }
}

Scheduler::~Scheduler() = default;

PlaceId Scheduler::place_count() const noexcept {
  return static_cast<PlaceId>(places_.size());
}

PlaceMetrics Scheduler::metrics() const {
  PlaceMetrics sum;
  for (const auto& p : places_) sum += p->metrics;
  return sum;
}

const PlaceMetrics& Scheduler::place_metrics(PlaceId p) const {
  return places_.at(p)->metrics;
}

void Scheduler::record(TraceEvent::Kind kind, PlaceId at, const StrategyDescriptor& d) {
  if (!config_.record_trace) return;
  trace_.push_back(TraceEvent{kind, at, d.spawn_place, d.seq});
}

void Scheduler::execute(detail::Place& place, const TaskRecordPtr& rec) {
  FinishRegion* const prev = place.current_region;
  place.current_region = rec->region;
  record(TraceEvent::Kind::kBegin, place.id, rec->desc);
  try {
    rec->work();
  } catch (...) {
    if (rec->region) rec->region->set_exception(std::current_exception());
  }
  rec->work.reset();
  place.current_region = prev;
  record(TraceEvent::Kind::kEnd, place.id, rec->desc);
  if (rec->region) rec->region->complete_one();
}

bool Scheduler::steal_round(detail::Place& place) {
  const std::vector<PlaceId> order = machine_.victim_order(place.id, place.rng);
  for (PlaceId v : order) {
    PriorityTaskStorage& victim = *places_[v]->storage;
    const std::uint64_t target = victim.total_queued_weight() / 2;
    if (target == 0) continue;
    std::vector<TaskRecordPtr> batch = victim.steal(place.id, target, place.metrics);
    if (batch.empty()) continue;
    if (config_.steal_observer) {
      std::vector<std::uint64_t> weights;
      weights.reserve(batch.size());
      for (const auto& r : batch) weights.push_back(r->desc.transitive_weight);
      config_.steal_observer(place.id, v, weights, target);
    }
    // Requeue everything but the best as fresh local records; the best runs
    // right away on the thief.
    for (std::size_t i = 1; i < batch.size(); ++i) {
      auto fresh = std::make_shared<TaskRecord>();
      fresh->desc = batch[i]->desc;
      fresh->work = std::move(batch[i]->work);
      fresh->region = batch[i]->region;
      place.storage->push(std::move(fresh), place.metrics);
    }
    execute(place, batch[0]);
    return true;
  }
  return false;
}

bool Scheduler::try_step(detail::Place& place) {
  if (TaskRecordPtr rec = place.storage->pop(place.metrics)) {
    execute(place, rec);
    return true;
  }
  if (places_.size() > 1) return steal_round(place);
  return false;
}

void Scheduler::idle_wait(detail::Place& place, unsigned& misses) {
  ++misses;
  if (misses < 2) return;
  // One core may be all there is; yield quickly so whoever holds work runs.
  if (misses < 8) {
    std::this_thread::yield();
    return;
  }
  const unsigned shift = std::min(misses - 8, 16u);
  const std::uint64_t us =
      std::min<std::uint64_t>(config_.steal_backoff_max_us,
                              std::uint64_t{config_.steal_backoff_min_us} << shift);
  std::this_thread::sleep_for(std::chrono::microseconds(us));
  (void)place;
}

void Scheduler::worker_main(detail::Place& place) {
  if (config_.pin_threads) pin_to_core(place.id);
  detail::tl_place = &place;
  unsigned misses = 0;
  while (!stop_.load(std::memory_order_acquire)) {
    if (try_step(place)) {
      misses = 0;
    } else {
      idle_wait(place, misses);
    }
  }
  detail::tl_place = nullptr;
}

void Scheduler::run(std::function<void()> entry) {
  if (ran_) throw std::logic_error("Scheduler::run may be called once");
  if (detail::tl_place) throw std::logic_error("nested Scheduler::run is not supported");
  ran_ = true;

  std::vector<std::thread> threads;
  threads.reserve(places_.size() - 1);
  for (PlaceId i = 1; i < places_.size(); ++i) {
    threads.emplace_back([this, i] { worker_main(*places_[i]); });
  }

  detail::Place& home = *places_[0];
  if (config_.pin_threads) pin_to_core(0);
  detail::tl_place = &home;
  FinishRegion root;
  home.current_region = &root;
  try {
    entry();
  } catch (...) {
    root.set_exception(std::current_exception());
  }
  unsigned misses = 0;
  while (root.pending() != 0) {
    if (try_step(home)) {
      misses = 0;
    } else {
      idle_wait(home, misses);
    }
  }
  home.current_region = nullptr;
  detail::tl_place = nullptr;
  stop_.store(true, std::memory_order_release);
  for (auto& t : threads) t.join();
  root.rethrow_if_any();
}

namespace detail {

void spawn_record(StrategyDescriptor desc, InlineTask work) {
  Place* const p = tl_place;
  if (!p) throw std::logic_error("spawn_s called outside a scheduler run");
  FinishRegion* const region = p->current_region;
  if (!region) throw std::logic_error("spawn_s called outside a finish scope");
  if (desc.transitive_weight == 0) throw std::invalid_argument("transitive weight must be >= 1");
  if (desc.type >= p->sched->registry_->type_count()) {
    throw std::invalid_argument("unknown strategy type");
  }
  desc.spawn_place = p->id;
  desc.seq = p->next_seq++;

  if (convert_decision(desc, p->storage->total_queued_weight(), p->storage->queued_count(),
                       p->sched->config_.call_conversion_divisor)) {
    p->metrics.call_conversions += 1;
    p->sched->record(TraceEvent::Kind::kConvert, p->id, desc);
    // Runs as a plain call, but failure semantics match a queued task: the
    // region keeps the exception and the spawner continues.
    try {
      work();
    } catch (...) {
      region->set_exception(std::current_exception());
    }
    return;
  }

  region->add_pending();
  auto rec = std::make_shared<TaskRecord>();
  rec->desc = desc;
  rec->work = std::move(work);
  rec->region = region;
  p->sched->record(TraceEvent::Kind::kSpawn, p->id, desc);
  p->storage->push(std::move(rec), p->metrics);
}

void finish_impl(void (*fn)(void*), void* ctx) {
  Place* const p = tl_place;
  if (!p) throw std::logic_error("finish called outside a scheduler run");
  FinishRegion region(p->current_region);
  FinishRegion* const prev = p->current_region;
  p->current_region = &region;
  try {
    fn(ctx);
  } catch (...) {
    region.set_exception(std::current_exception());
  }
  p->current_region = prev;
  Scheduler* const sched = p->sched;
  unsigned misses = 0;
  while (region.pending() != 0) {
    if (sched->try_step(*p)) {
      misses = 0;
    } else {
      sched->idle_wait(*p, misses);
    }
  }
  region.rethrow_if_any();
}

}  // namespace detail

PlaceId current_place() {
  if (!detail::tl_place) throw std::logic_error("current_place called outside a scheduler run");
  return detail::tl_place->id;
}

DeterministicRun run_deterministic(const StrategyRegistry& registry,
                                   std::function<void()> entry, std::uint64_t seed) {
  SchedulerConfig config;
  config.thread_count = 1;
  config.rng_seed = seed;
  config.record_trace = true;
  Scheduler sched(std::move(config), registry);
  sched.run(std::move(entry));
  return DeterministicRun{sched.trace(), sched.metrics()};
}

}  // namespace stratsched
