// Acceptance suite: one self-contained check per shipped guarantee, printed
// as a single [PASS]/[FAIL] line each. Exit status is nonzero when any check
// fails. Thresholds and workload sizes are pinned here, in code, so a green
// run certifies the same bar every time.
//
//  1. Storage pop order matches a brute-force grouped priority oracle.
//  2. Branch-and-bound optimum equals exhaustive enumeration.
//  3. Priority guidance lowers search volume and time-to-optimum (paired).
//  4. Weight-halving steals take exactly the largest queued task.
//  5. Prefix sum is bit-exact; one worker never needs a second pass.
//  6. Tree traversal counts are thread- and conversion-invariant; call
//     conversion cuts queue churn.
//  7. Shortest-path distances equal the reference solver's.
//  8. Strips always partition the mesh; guided runs use no more strips.
//  9. Parallel sort yields a sorted permutation at every thread count.
// 10. Co-scheduled kernels stay correct with near-additive wall time.
// 11. Concurrent storage stress keeps exactly-once, lossless accounting.

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "stratsched/kernels/bipartition.hpp"
#include "stratsched/kernels/composed.hpp"
#include "stratsched/kernels/prefix_sum.hpp"
#include "stratsched/kernels/quicksort.hpp"
#include "stratsched/kernels/sssp.hpp"
#include "stratsched/kernels/tristrip.hpp"
#include "stratsched/kernels/uts.hpp"
#include "stratsched/scheduler.hpp"
#include "stratsched/task_storage.hpp"
#include "support/reference_order.hpp"

using namespace stratsched;
namespace k = stratsched::kernels;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n == 0 ? 0.0 : n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

TaskRecordPtr make_record(StrategyDescriptor d) {
  auto rec = std::make_shared<TaskRecord>();
  rec->desc = d;
  rec->work = [] {};
  return rec;
}

// ---------------------------------------------------------------------------
// 1. Ordering oracle: 1,000 randomized task sets of at most 64 tasks over a
//    random hierarchy of 2-4 strategy types. The storage's single-threaded
//    pop order must equal the brute-force grouped order built from pairwise
//    cross-type comparison, and types must drain contiguously.
Outcome criterion_ordering_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20260822);
  const MachineTree tree({2, 2});
  int mismatches = 0;
  int grouping_breaks = 0;
  int pairwise_breaks = 0;
  const int kSets = 1000;

  for (int iter = 0; iter < kSets; ++iter) {
    StrategyRegistry reg;
    std::vector<TypeId> ids{kRootStrategy};
    const unsigned extra_types = 2 + static_cast<unsigned>(rng() % 3);  // 2..4
    for (unsigned t = 0; t < extra_types; ++t) {
      const TypeId parent = ids[rng() % ids.size()];
      PriorityFn cmp;
      if (rng() % 10 < 7) {
        const int slot = static_cast<int>(rng() % 2);
        const bool ascending = rng() % 2 == 0;
        cmp = [slot, ascending](const StrategyDescriptor& a, const StrategyDescriptor& b,
                                const PriorityContext&) {
          const std::int64_t x = a.payload.slot[slot];
          const std::int64_t y = b.payload.slot[slot];
          if (x == y) return std::weak_ordering::equivalent;
          return (x < y) == ascending ? std::weak_ordering::less : std::weak_ordering::greater;
        };
      }
      // Half the types project their payload unchanged onto every custom
      // ancestor, so cross-subtree comparisons see real slot values.
      std::vector<std::pair<TypeId, ProjectFn>> projections;
      if (rng() % 2 == 0) {
        for (TypeId anc = parent; anc != kRootStrategy; anc = reg.parent(anc)) {
          projections.emplace_back(anc,
                                   [](const StrategyDescriptor& d) { return d.payload; });
        }
      }
      ids.push_back(reg.register_type(parent, "t" + std::to_string(t), std::move(cmp), {},
                                      std::move(projections)));
    }

    const std::size_t count = 1 + rng() % 64;
    std::vector<StrategyDescriptor> tasks(count);
    for (std::size_t i = 0; i < count; ++i) {
      StrategyDescriptor d;
      d.type = ids[rng() % ids.size()];
      d.spawn_place = static_cast<PlaceId>(rng() % tree.leaf_count());
      d.seq = i;  // globally unique, so LIFO/FIFO tie-breaks are total
      d.transitive_weight = 1 + rng() % 8;
      for (int s = 0; s < 3; ++s) d.payload.slot[s] = static_cast<std::int64_t>(rng() % 5);
      tasks[i] = d;
    }

    PriorityTaskStorage storage(0, tree.leaf_count(), reg, tree);
    PlaceMetrics m;
    std::unordered_map<const TaskRecord*, std::size_t> index_of;
    for (std::size_t i = 0; i < count; ++i) {
      auto rec = make_record(tasks[i]);
      index_of[rec.get()] = i;
      storage.push(std::move(rec), m);
    }
    std::vector<std::size_t> popped;
    while (auto rec = storage.pop(m)) popped.push_back(index_of.at(rec.get()));

    const auto expected = stratsched_test::reference_order(reg, tree, 0, tasks);
    if (popped != expected) ++mismatches;
    if (!stratsched_test::grouping_holds(reg, tasks, popped)) ++grouping_breaks;

    // Same-type pairs form a total order, so every such pair in the emitted
    // sequence must agree with the pairwise comparison.
    const PriorityContext ctx{0, &tree};
    for (std::size_t i = 0; i < popped.size() && pairwise_breaks == 0; ++i) {
      for (std::size_t j = i + 1; j < popped.size(); ++j) {
        const auto& a = tasks[popped[i]];
        const auto& b = tasks[popped[j]];
        if (a.type != b.type) continue;
        if (reg.compare_cross_type(a, b, ctx) == std::weak_ordering::greater) {
          ++pairwise_breaks;
          break;
        }
      }
    }
  }

  const double elapsed = seconds_since(t0);
  const bool pass =
      mismatches == 0 && grouping_breaks == 0 && pairwise_breaks == 0 && elapsed < 60.0;
  return {pass, format("%d sets, %d order mismatches, %d grouping breaks, %d pairwise breaks, "
                       "%.1fs (limit 60s)",
                       kSets, mismatches, grouping_breaks, pairwise_breaks, elapsed)};
}

// ---------------------------------------------------------------------------
// 2. Branch-and-bound exactness: n in {8,10,12,14,16}, 10 seeds, threads in
//    {1,2,4}, both wiring modes; the solver's optimum must equal exhaustive
//    enumeration every time.
Outcome criterion_bb_exact() {
  int runs = 0;
  int wrong = 0;
  for (unsigned n : {8u, 10u, 12u, 14u, 16u}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto p = k::generate_bipartition(n, 50, 100, seed);
      const std::int64_t want = k::brute_force_bipartition(p);
      for (unsigned threads : {1u, 2u, 4u}) {
        for (k::KernelMode mode : {k::KernelMode::kStrategy, k::KernelMode::kLifoFifo}) {
          SchedulerConfig cfg;
          cfg.thread_count = threads;
          cfg.rng_seed = seed;
          const auto r = k::bb_solve(p, cfg, mode);
          ++runs;
          if (!r.valid || r.best_cut != want) ++wrong;
        }
      }
    }
  }
  return {wrong == 0, format("%d runs across 5 sizes x 10 seeds x 3 thread counts x 2 modes, "
                             "%d disagreed with enumeration",
                             runs, wrong)};
}

// ---------------------------------------------------------------------------
// 3. Paired search-quality comparison on 22-vertex instances at 4 threads:
//    over 10 paired seeds, the guided mode's median expanded-node count and
//    median time-to-optimum must not exceed the baseline's.
Outcome criterion_bb_direction() {
  const auto t0 = Clock::now();
  std::vector<double> nodes_s, nodes_l, tto_s, tto_l;
  int cut_disagreements = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto p = k::generate_bipartition(22, 50, 100, seed);
    SchedulerConfig cfg;
    cfg.thread_count = 4;
    cfg.rng_seed = seed;
    const auto rs = k::bb_solve(p, cfg, k::KernelMode::kStrategy);
    const auto rl = k::bb_solve(p, cfg, k::KernelMode::kLifoFifo);
    if (!rs.valid || !rl.valid || rs.best_cut != rl.best_cut) ++cut_disagreements;
    nodes_s.push_back(static_cast<double>(rs.nodes_expanded));
    nodes_l.push_back(static_cast<double>(rl.nodes_expanded));
    tto_s.push_back(rs.time_to_optimum_ms);
    tto_l.push_back(rl.time_to_optimum_ms);
  }
  const double mn_s = median(nodes_s), mn_l = median(nodes_l);
  const double mt_s = median(tto_s), mt_l = median(tto_l);
  const double elapsed = seconds_since(t0);
  const bool pass =
      cut_disagreements == 0 && mn_s <= mn_l && mt_s <= mt_l && elapsed < 300.0;
  return {pass, format("median nodes %.0f vs %.0f, median time-to-optimum %.2fms vs %.2fms, "
                       "%d cut disagreements, %.1fs (limit 300s)",
                       mn_s, mn_l, mt_s, mt_l, cut_disagreements, elapsed)};
}

// ---------------------------------------------------------------------------
// 4. Steal-half on power-of-two weights: with a victim holding weights
//    2^k, 2^(k-1), ..., 1 and a thief targeting half the queued weight, every
//    steal must net exactly one record — the current largest — until only the
//    weight-1 task is left for the owner. 100 seeded runs.
Outcome criterion_steal_half() {
  int violations = 0;
  int total_steals = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const unsigned kmax = 4 + static_cast<unsigned>(rng() % 14);  // top weight 2^4..2^17
    StrategyRegistry reg;
    const MachineTree tree({2});
    PriorityTaskStorage storage(0, 2, reg, tree);
    PlaceMetrics owner_m, thief_m;
    std::uint64_t seq = 0;
    for (unsigned e = kmax + 1; e-- > 0;) {
      StrategyDescriptor d;
      d.spawn_place = 0;
      d.seq = seq++;
      d.transitive_weight = std::uint64_t{1} << e;
      storage.push(make_record(d), owner_m);
    }

    std::uint64_t expected_max = std::uint64_t{1} << kmax;
    while (true) {
      const std::uint64_t queued = storage.total_queued_weight();
      const std::uint64_t target = queued / 2;
      if (target == 0) break;  // a thief aiming for zero weight skips the victim
      const auto batch = storage.steal(1, target, thief_m);
      ++total_steals;
      if (batch.size() != 1 || batch[0]->desc.transitive_weight != expected_max) {
        ++violations;
        break;
      }
      expected_max >>= 1;
    }
    // The weight-1 remainder belongs to the owner.
    const auto last = storage.pop(owner_m);
    if (!last || last->desc.transitive_weight != 1 || storage.pop(owner_m)) ++violations;
    if (owner_m.pushes != owner_m.pops + thief_m.steals) ++violations;
  }
  return {violations == 0,
          format("100 seeded runs, %d steals observed, %d violations of "
                 "single-largest-task batches",
                 total_steals, violations)};
}

// ---------------------------------------------------------------------------
// 5. Prefix sum: 50 randomized arrays with lengths spanning 0..10^6 must come
//    out bit-equal to the sequential scan, and every one-worker run must
//    finish with zero second-pass blocks.
Outcome criterion_prefix() {
  std::mt19937_64 rng(501);
  int unequal = 0;
  int second_pass_nonzero = 0;
  const int kArrays = 50;
  for (int i = 0; i < kArrays; ++i) {
    const std::size_t len = i == 0 ? 0 : i == 1 ? 1'000'000 : rng() % 1'000'001;
    std::vector<std::int64_t> data(len);
    for (auto& v : data) v = static_cast<std::int64_t>(rng());
    const auto golden = k::sequential_prefix(data);
    const std::size_t blocks = 1 + rng() % 128;
    const std::size_t block_size = len == 0 ? 1 : (len + blocks - 1) / blocks;

    SchedulerConfig one;
    one.thread_count = 1;
    one.rng_seed = static_cast<std::uint64_t>(i);
    auto copy = data;
    const auto r1 = k::prefix_sum(copy, block_size, one, k::KernelMode::kStrategy);
    if (copy != golden) ++unequal;
    if (r1.second_pass_blocks != 0) ++second_pass_nonzero;

    SchedulerConfig many = one;
    many.thread_count = i % 2 == 0 ? 2 : 4;
    auto copy2 = data;
    k::prefix_sum(copy2, block_size, many, k::KernelMode::kStrategy);
    if (copy2 != golden) ++unequal;
  }
  return {unequal == 0 && second_pass_nonzero == 0,
          format("%d arrays (lengths 0..10^6), %d outputs differed from the sequential scan, "
                 "%d one-worker runs needed a second pass",
                 kArrays, unequal, second_pass_nonzero)};
}

// ---------------------------------------------------------------------------
// 6. Tree traversal determinism: the default generator parameters must count
//    exactly 3,958,713 nodes — sequentially, and under every combination of
//    threads {1,2,4,8} and conversion on/off. With conversion on, storage
//    pushes must stay at or below half the node count.
Outcome criterion_uts() {
  constexpr std::uint64_t kFrozenNodeCount = 3'958'713;
  const k::UTSParams defaults;
  const std::uint64_t sequential = k::uts_count_sequential(defaults);
  if (sequential != kFrozenNodeCount) {
    return {false, format("sequential count %llu != frozen %llu",
                          static_cast<unsigned long long>(sequential),
                          static_cast<unsigned long long>(kFrozenNodeCount))};
  }

  // The one-worker scheduler run is the recorded golden; everything else must
  // reproduce it.
  SchedulerConfig oracle_cfg;
  oracle_cfg.thread_count = 1;
  const auto oracle = k::uts_run(defaults, oracle_cfg, k::KernelMode::kStrategy);
  const std::uint64_t golden = oracle.node_count;
  if (golden != kFrozenNodeCount) {
    return {false, format("one-worker count %llu != frozen %llu",
                          static_cast<unsigned long long>(golden),
                          static_cast<unsigned long long>(kFrozenNodeCount))};
  }

  int count_mismatches = 0;
  int churn_breaks = 0;
  double worst_ratio = 0.0;
  for (bool conversion : {true, false}) {
    for (unsigned threads : {1u, 2u, 4u, 8u}) {
      k::UTSParams p = defaults;
      p.allow_conversion = conversion;
      SchedulerConfig cfg;
      cfg.thread_count = threads;
      PlaceMetrics m;
      const auto r = k::uts_run(p, cfg, k::KernelMode::kStrategy, &m);
      if (r.node_count != golden) ++count_mismatches;
      if (conversion) {
        const double ratio = static_cast<double>(m.pushes) / static_cast<double>(golden);
        worst_ratio = std::max(worst_ratio, ratio);
        if (m.pushes > golden / 2) ++churn_breaks;
      }
    }
  }
  return {count_mismatches == 0 && churn_breaks == 0,
          format("node count %llu identical in 8/8 runs (%d mismatches); conversion-on "
                 "pushes/nodes worst %.4f (bound 0.5, %d breaks)",
                 static_cast<unsigned long long>(golden), count_mismatches, worst_ratio,
                 churn_breaks)};
}

// ---------------------------------------------------------------------------
// 7. Shortest paths: 10 seeded graphs (2,000 nodes, 10% density, weights
//    1..1000) at threads {1,2,4}; every distance vector must equal the
//    reference solver's.
Outcome criterion_sssp() {
  int runs = 0;
  int wrong = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = k::generate_graph(2000, 10, 1000, seed);
    const auto want = k::dijkstra(g, 0);
    for (unsigned threads : {1u, 2u, 4u}) {
      SchedulerConfig cfg;
      cfg.thread_count = threads;
      cfg.rng_seed = seed;
      const auto r = k::sssp_run(g, 0, cfg, k::KernelMode::kStrategy);
      ++runs;
      if (r.dist != want) ++wrong;
    }
  }
  return {wrong == 0, format("%d runs over 10 graphs x 3 thread counts, %d distance vectors "
                             "differed from the reference solver",
                             runs, wrong)};
}

// ---------------------------------------------------------------------------
// 8. Strip decomposition on a 64x64 grid at 4 threads: every run must yield a
//    valid partition into adjacency paths, and over 10 paired seeds the
//    guided mode's strip count must be at most the baseline's in >= 6 pairs.
Outcome criterion_tristrip() {
  const auto mesh = k::grid_mesh(64);
  int invalid = 0;
  int wins = 0;
  std::size_t min_s = ~std::size_t{0}, max_s = 0, min_l = ~std::size_t{0}, max_l = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SchedulerConfig cfg;
    cfg.thread_count = 4;
    cfg.rng_seed = seed;
    const auto rs = k::tristrip_run(mesh, cfg, k::KernelMode::kStrategy, seed);
    const auto rl = k::tristrip_run(mesh, cfg, k::KernelMode::kLifoFifo, seed);
    if (!k::verify_strips(mesh, rs.strips)) ++invalid;
    if (!k::verify_strips(mesh, rl.strips)) ++invalid;
    if (rs.strips.size() <= rl.strips.size()) ++wins;
    min_s = std::min(min_s, rs.strips.size());
    max_s = std::max(max_s, rs.strips.size());
    min_l = std::min(min_l, rl.strips.size());
    max_l = std::max(max_l, rl.strips.size());
  }
  return {invalid == 0 && wins >= 6,
          format("%d invalid partitions; guided <= baseline in %d/10 pairs (need >= 6); "
                 "strip counts guided %zu..%zu, baseline %zu..%zu",
                 invalid, wins, min_s, max_s, min_l, max_l)};
}

// ---------------------------------------------------------------------------
// 9. Sorting: 20 seeded arrays with lengths from 10^7 down to 0, each sorted
//    at threads {1,2,4,8}; every output must equal the independently sorted
//    golden copy (which certifies both order and permutation).
Outcome criterion_quicksort() {
  int runs = 0;
  int wrong = 0;
  std::size_t largest = 0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t len = i == 18 ? 1 : i == 19 ? 0 : (std::size_t{10'000'000} >> i);
    largest = std::max(largest, len);
    const auto data = k::generate_array(len, 100 + static_cast<std::uint64_t>(i));
    auto golden = data;
    std::sort(golden.begin(), golden.end());
    for (unsigned threads : {1u, 2u, 4u, 8u}) {
      SchedulerConfig cfg;
      cfg.thread_count = threads;
      cfg.rng_seed = static_cast<std::uint64_t>(i);
      auto copy = data;
      k::quicksort_run(copy, 256, cfg, k::KernelMode::kStrategy);
      ++runs;
      if (copy != golden) ++wrong;
    }
  }
  return {wrong == 0, format("%d runs over 20 arrays (largest %zu) x 4 thread counts, "
                             "%d outputs were not the sorted permutation",
                             runs, largest, wrong)};
}

// ---------------------------------------------------------------------------
// 10. Composition: prefix sum and tree traversal under one scheduler must
//     both stay correct at threads {1,2,4,8} x 10 seeds with no failures,
//     and at 2+ threads the composed median wall time must stay within 1.10x
//     the sum of the standalone medians at the same thread count.
Outcome criterion_composed() {
  k::UTSParams up;
  up.root_state = 5;
  up.b0 = 4.0;
  const std::uint64_t golden_nodes = k::uts_count_sequential(up);
  const std::size_t n = 2'000'000;
  const std::size_t block_size = (n + 63) / 64;
  const unsigned thread_counts[] = {1, 2, 4, 8};

  int failures = 0;
  std::map<unsigned, std::vector<double>> wall_composed, wall_prefix, wall_uts;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::int64_t> data(n);
    for (auto& v : data) v = static_cast<std::int64_t>(rng() % 2001) - 1000;
    const auto golden_prefix = k::sequential_prefix(data);
    for (unsigned threads : thread_counts) {
      SchedulerConfig cfg;
      cfg.thread_count = threads;
      cfg.rng_seed = seed;
      try {
        PlaceMetrics m;
        auto copy = data;
        const auto rc = k::composed_run(copy, block_size, up, cfg, k::KernelMode::kStrategy, &m);
        const bool ok = copy == golden_prefix && rc.uts_node_count == golden_nodes &&
                        m.pushes == m.pops + m.steals + m.dead_removed;
        if (!ok) ++failures;
        wall_composed[threads].push_back(rc.wall_ms);

        auto copy2 = data;
        const auto rp = k::prefix_sum(copy2, block_size, cfg, k::KernelMode::kStrategy);
        const auto ru = k::uts_run(up, cfg, k::KernelMode::kStrategy);
        if (copy2 != golden_prefix || ru.node_count != golden_nodes) ++failures;
        wall_prefix[threads].push_back(rp.wall_ms);
        wall_uts[threads].push_back(ru.wall_ms);
      } catch (const std::exception&) {
        ++failures;  // any escape from a run counts as a comparator failure
      }
    }
  }

  double worst_ratio = 0.0;
  int ratio_breaks = 0;
  for (unsigned threads : {2u, 4u, 8u}) {
    const double mc = median(wall_composed[threads]);
    const double sum = median(wall_prefix[threads]) + median(wall_uts[threads]);
    const double ratio = mc / sum;
    worst_ratio = std::max(worst_ratio, ratio);
    if (mc > 1.10 * sum) ++ratio_breaks;
  }
  return {failures == 0 && ratio_breaks == 0,
          format("40 composed runs, %d correctness/comparator failures; composed/standalone "
                 "median wall ratio worst %.3f (bound 1.10, %d breaks)",
                 failures, worst_ratio, ratio_breaks)};
}

// ---------------------------------------------------------------------------
// 11. Concurrency stress: 10,000 rounds of one owner pushing/popping up to 50
//     tasks while three thieves steal with random targets. Every record must
//     be consumed exactly once (or retired dead), nothing may be lost, and
//     pushes == pops + steals + dead_removed must hold at every quiescence.
Outcome criterion_storage_stress() {
  constexpr int kRounds = 10'000;
  constexpr int kThieves = 3;

  std::atomic<std::int64_t> kill_threshold{-1};
  StrategyRegistry reg;
  const TypeId prio = reg.register_type(
      kRootStrategy, "prio",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext&) {
        return a.payload.slot[1] <=> b.payload.slot[1];
      });
  const TypeId doomed = reg.register_type(
      kRootStrategy, "doomed", {},
      [&kill_threshold](const StrategyDescriptor& d) {
        return d.payload.slot[0] <= kill_threshold.load(std::memory_order_relaxed);
      });

  const MachineTree tree({4});
  PriorityTaskStorage storage(0, 4, reg, tree);
  PlaceMetrics owner_m;
  PlaceMetrics thief_m[kThieves];

  std::vector<std::atomic<std::uint8_t>> consumed(64);
  std::vector<TaskRecordPtr> records;
  std::atomic<bool> stop_round{false};
  std::atomic<int> double_consume{0};
  std::barrier sync(1 + kThieves);

  auto thief_body = [&](int id) {
    std::mt19937_64 rng(0xabcdefULL + static_cast<std::uint64_t>(id));
    for (int round = 0; round < kRounds; ++round) {
      sync.arrive_and_wait();  // round start
      while (!stop_round.load(std::memory_order_acquire)) {
        const std::uint64_t target = 1 + rng() % 32;
        const auto batch = storage.steal(static_cast<PlaceId>(1 + id), target, thief_m[id]);
        for (const auto& rec : batch) {
          if (consumed[rec->desc.seq].fetch_add(1) != 0) double_consume.fetch_add(1);
        }
      }
      sync.arrive_and_wait();  // work done
      sync.arrive_and_wait();  // owner verified, flags reset
    }
  };

  std::vector<std::thread> thieves;
  for (int id = 0; id < kThieves; ++id) thieves.emplace_back(thief_body, id);

  int lost = 0, not_quiesced = 0, conservation_breaks = 0;
  std::mt19937_64 rng(0x57e55);
  for (int round = 0; round < kRounds; ++round) {
    const unsigned count = static_cast<unsigned>(rng() % 51);  // 0..50 tasks
    kill_threshold.store(-1, std::memory_order_relaxed);
    for (auto& f : consumed) f.store(0, std::memory_order_relaxed);
    records.clear();
    stop_round.store(false, std::memory_order_release);
    sync.arrive_and_wait();  // round start

    for (unsigned i = 0; i < count; ++i) {
      StrategyDescriptor d;
      const unsigned pick = static_cast<unsigned>(rng() % 3);
      d.type = pick == 0 ? kRootStrategy : pick == 1 ? prio : doomed;
      d.spawn_place = 0;
      d.seq = i;
      d.transitive_weight = 1 + rng() % 16;
      d.payload.slot[0] = static_cast<std::int64_t>(rng() % 50);
      d.payload.slot[1] = static_cast<std::int64_t>(rng() % 100);
      auto rec = make_record(d);
      records.push_back(rec);
      storage.push(std::move(rec), owner_m);
      if (rng() % 4 == 0) {
        if (auto popped = storage.pop(owner_m)) {
          if (consumed[popped->desc.seq].fetch_add(1) != 0) double_consume.fetch_add(1);
        }
      }
      if (rng() % 16 == 0) {
        // Raise the kill threshold monotonically; some queued tasks go dead.
        const std::int64_t next = static_cast<std::int64_t>(rng() % 50);
        std::int64_t cur = kill_threshold.load(std::memory_order_relaxed);
        while (cur < next &&
               !kill_threshold.compare_exchange_weak(cur, next, std::memory_order_relaxed)) {
        }
      }
    }
    while (auto popped = storage.pop(owner_m)) {
      if (consumed[popped->desc.seq].fetch_add(1) != 0) double_consume.fetch_add(1);
    }
    stop_round.store(true, std::memory_order_release);
    sync.arrive_and_wait();  // work done

    // Quiescent: verify this round's accounting.
    if (storage.queued_count() != 0 || storage.total_queued_weight() != 0) ++not_quiesced;
    for (const auto& rec : records) {
      const TaskState st = rec->state.load(std::memory_order_acquire);
      const std::uint8_t c = consumed[rec->desc.seq].load(std::memory_order_relaxed);
      const bool ran_once = st == TaskState::kTaken && c == 1;
      const bool retired = st == TaskState::kDead && c == 0;
      if (!ran_once && !retired) ++lost;
    }
    PlaceMetrics total = owner_m;
    for (const auto& t : thief_m) total += t;
    if (total.pushes != total.pops + total.steals + total.dead_removed) ++conservation_breaks;

    sync.arrive_and_wait();  // release thieves into the next round
  }
  for (auto& t : thieves) t.join();

  const int dbl = double_consume.load();
  PlaceMetrics total = owner_m;
  for (const auto& t : thief_m) total += t;
  const bool pass = lost == 0 && dbl == 0 && not_quiesced == 0 && conservation_breaks == 0;
  return {pass, format("%d rounds, %llu records pushed; %d lost, %d double-consumed, %d "
                       "non-quiescent rounds, %d conservation breaks",
                       kRounds, static_cast<unsigned long long>(total.pushes), lost, dbl,
                       not_quiesced, conservation_breaks)};
}

}  // namespace

int main() {
  struct Entry {
    const char* title;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"storage pop order matches the grouped priority oracle", criterion_ordering_oracle},
      {"branch-and-bound optimum equals exhaustive enumeration", criterion_bb_exact},
      {"priority guidance lowers search volume and time-to-optimum", criterion_bb_direction},
      {"weight-halving steals take exactly the largest task", criterion_steal_half},
      {"prefix sum is bit-exact and single-worker runs skip the second pass", criterion_prefix},
      {"tree traversal count is thread- and conversion-invariant with low churn", criterion_uts},
      {"shortest-path distances equal the reference solver", criterion_sssp},
      {"strips always partition the mesh and guided runs use no more strips",
       criterion_tristrip},
      {"parallel sort yields a sorted permutation at every thread count", criterion_quicksort},
      {"co-scheduled kernels stay correct with near-additive wall time", criterion_composed},
      {"storage survives randomized concurrent stress with exact accounting",
       criterion_storage_stress},
  };

  int failed = 0;
  int index = 0;
  for (const auto& e : entries) {
    ++index;
    Outcome out;
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out = {false, std::string("exception: ") + ex.what()};
    }
    if (!out.pass) ++failed;
    std::printf("[%s] %2d. %s — %s\n", out.pass ? "PASS" : "FAIL", index, e.title,
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d acceptance checks passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
