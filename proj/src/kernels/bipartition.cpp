#include "stratsched/kernels/bipartition.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <limits>
#include <mutex>
#include <stdexcept>

namespace stratsched::kernels {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Total edge weight from vertex v into the vertices of `mask`.
std::int64_t side_weight(const BipartitionProblem& p, unsigned v, std::uint32_t mask) {
  std::int64_t sum = 0;
  while (mask) {
    const unsigned j = static_cast<unsigned>(std::countr_zero(mask));
    mask &= mask - 1;
    sum += p.w(v, j);
  }
  return sum;
}

struct BBContext {
  const BipartitionProblem* p = nullptr;
  KernelMode mode = KernelMode::kStrategy;
  TypeId type = kRootStrategy;
  std::int64_t avg_contrib = 1;
  std::uint32_t all_mask = 0;

  std::atomic<std::int64_t> ub{std::numeric_limits<std::int64_t>::max()};
  std::atomic<std::uint64_t> nodes{0};

  std::mutex best_mtx;
  std::int64_t best_recorded = std::numeric_limits<std::int64_t>::max();
  std::uint32_t best_mask = 0;
  Clock::time_point start;
  double tto_ms = 0.0;
};

void update_solution(BBContext* c, std::int64_t value, std::uint32_t mask_a) {
  std::int64_t cur = c->ub.load(std::memory_order_relaxed);
  bool improved = false;
  while (value < cur) {
    if (c->ub.compare_exchange_weak(cur, value, std::memory_order_relaxed)) {
      improved = true;
      break;
    }
  }
  if (!improved) return;
  const double at = ms_since(c->start);
  std::lock_guard<std::mutex> lk(c->best_mtx);
  if (value < c->best_recorded) {
    c->best_recorded = value;
    c->best_mask = mask_a;
    c->tto_ms = at;
  }
}

StrategyDescriptor bb_descriptor(BBContext* c, std::int64_t est, std::int64_t lb,
                                 unsigned free_count) {
  StrategyDescriptor d;
  if (c->mode != KernelMode::kStrategy) return d;  // plain LIFO/FIFO task
  d.type = c->type;
  d.allow_call_conversion = true;
  const unsigned depth = bb_estimated_depth(c->ub.load(std::memory_order_relaxed), lb,
                                            c->avg_contrib, free_count);
  d.transitive_weight = std::max<std::uint64_t>(1, (std::uint64_t{1} << depth) - 1);
  d.payload.slot[0] = est;
  d.payload.slot[1] = lb;
  d.payload.slot[2] = std::bit_cast<std::int64_t>(&c->ub);
  return d;
}

void bb_task(BBContext* c, std::uint32_t mask_a, std::uint32_t mask_b, std::int64_t lb) {
  if (lb >= c->ub.load(std::memory_order_relaxed)) return;  // bound
  c->nodes.fetch_add(1, std::memory_order_relaxed);
  const BipartitionProblem& p = *c->p;
  const std::uint32_t assigned = mask_a | mask_b;
  std::uint32_t free_mask = c->all_mask & ~assigned;
  if (free_mask == 0) {  // fully assigned (defensive; normally collapsed earlier)
    update_solution(c, bipartition_cut(p, mask_a), mask_a);
    return;
  }

  // Branch on the free vertex most strongly tied to the assigned vertices.
  unsigned branch = 0;
  std::int64_t best_tie = -1;
  for (std::uint32_t rest = free_mask; rest;) {
    const unsigned v = static_cast<unsigned>(std::countr_zero(rest));
    rest &= rest - 1;
    const std::int64_t tie = side_weight(p, v, assigned);
    if (tie > best_tie) {
      best_tie = tie;
      branch = v;
    }
  }

  const bool at_root = assigned == 0;
  for (int side = 0; side < 2; ++side) {
    // Mirror symmetry: with equal set sizes, the root vertex may go to A only.
    if (side == 1 && at_root && p.k1 == p.k2) break;
    const std::uint32_t bit = std::uint32_t{1} << branch;
    std::uint32_t new_a = mask_a | (side == 0 ? bit : 0);
    std::uint32_t new_b = mask_b | (side == 0 ? 0 : bit);
    const unsigned cnt = static_cast<unsigned>(std::popcount(side == 0 ? new_a : new_b));
    if (cnt > (side == 0 ? p.k1 : p.k2)) continue;  // side already full

    if (std::popcount(new_a) == static_cast<int>(p.k1)) {
      // A complete: every remaining vertex is forced into B — a solution.
      update_solution(c, bipartition_cut(p, new_a), new_a);
      continue;
    }
    if (std::popcount(new_b) == static_cast<int>(p.k2)) {
      // B complete: the rest goes to A.
      const std::uint32_t final_a = c->all_mask & ~new_b;
      update_solution(c, bipartition_cut(p, final_a), final_a);
      continue;
    }

    const std::int64_t child_lb = bb_lower_bound(p, new_a, new_b);
    if (child_lb >= c->ub.load(std::memory_order_relaxed)) continue;  // bound at spawn
    const std::int64_t child_est = bb_estimate(p, new_a, new_b);
    const unsigned child_free = static_cast<unsigned>(std::popcount(c->all_mask & ~(new_a | new_b)));
    spawn_s(bb_descriptor(c, child_est, child_lb, child_free),
            [c, new_a, new_b, child_lb] { bb_task(c, new_a, new_b, child_lb); });
  }
}

TypeId register_bb_strategy(StrategyRegistry& reg) {
  return reg.register_type(
      kRootStrategy, "bb_bound",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext& ctx) {
        const bool la = ctx.local(a);
        const bool lb = ctx.local(b);
        if (la != lb) return la ? std::weak_ordering::less : std::weak_ordering::greater;
        if (la) return std::weak_ordering(a.payload.slot[0] <=> b.payload.slot[0]);
        // Thieves chase uncertainty: wide (estimate - bound) gaps promise the
        // most unexplored work.
        return std::weak_ordering((b.payload.slot[0] - b.payload.slot[1]) <=>
                                  (a.payload.slot[0] - a.payload.slot[1]));
      },
      [](const StrategyDescriptor& d) {
        const auto* ub = std::bit_cast<const std::atomic<std::int64_t>*>(d.payload.slot[2]);
        return d.payload.slot[1] >= ub->load(std::memory_order_relaxed);
      });
}

void validate(const BipartitionProblem& p) {
  if (p.n > kBipartitionMaxVertices) throw std::invalid_argument("bipartition: n exceeds 32");
  if (p.k1 + p.k2 != p.n) throw std::invalid_argument("bipartition: k1 + k2 must equal n");
  if (p.weights.size() != static_cast<std::size_t>(p.n) * p.n) {
    throw std::invalid_argument("bipartition: weight matrix size mismatch");
  }
}

}  // namespace

BipartitionProblem generate_bipartition(unsigned n, unsigned density_pct,
                                        std::int64_t weight_max, std::uint64_t seed) {
  if (n > kBipartitionMaxVertices) throw std::invalid_argument("bipartition: n exceeds 32");
  if (weight_max < 1) throw std::invalid_argument("bipartition: weight_max must be >= 1");
  BipartitionProblem p;
  p.n = n;
  p.k1 = n / 2;
  p.k2 = n - p.k1;
  p.weights.assign(static_cast<std::size_t>(n) * n, 0);
  std::mt19937_64 rng(seed);
  for (unsigned i = 0; i < n; ++i) {
    for (unsigned j = i + 1; j < n; ++j) {
      if (rand_below(rng, 100) < density_pct) {
        const std::int64_t w = rand_range(rng, 1, weight_max);
        p.weights[i * n + j] = w;
        p.weights[j * n + i] = w;
      }
    }
  }
  return p;
}

std::int64_t bipartition_cut(const BipartitionProblem& p, std::uint32_t mask_a) {
  std::int64_t cut = 0;
  for (unsigned i = 0; i < p.n; ++i) {
    for (unsigned j = i + 1; j < p.n; ++j) {
      if (((mask_a >> i) & 1u) != ((mask_a >> j) & 1u)) cut += p.w(i, j);
    }
  }
  return cut;
}

std::int64_t bb_lower_bound(const BipartitionProblem& p, std::uint32_t mask_a,
                            std::uint32_t mask_b) {
  std::int64_t bound = 0;
  for (std::uint32_t rest = mask_a; rest;) {
    const unsigned i = static_cast<unsigned>(std::countr_zero(rest));
    rest &= rest - 1;
    bound += side_weight(p, i, mask_b);  // assigned-to-assigned cut edges
  }
  const bool a_full = std::popcount(mask_a) == static_cast<int>(p.k1);
  const bool b_full = std::popcount(mask_b) == static_cast<int>(p.k2);
  const std::uint32_t all = p.n == 32 ? ~std::uint32_t{0} : ((std::uint32_t{1} << p.n) - 1);
  for (std::uint32_t rest = all & ~(mask_a | mask_b); rest;) {
    const unsigned v = static_cast<unsigned>(std::countr_zero(rest));
    rest &= rest - 1;
    const std::int64_t wa = side_weight(p, v, mask_a);
    const std::int64_t wb = side_weight(p, v, mask_b);
    // Joining A cuts the edges into B and vice versa; a full set forces the
    // choice, otherwise take the cheaper side.
    if (a_full) {
      bound += wa;
    } else if (b_full) {
      bound += wb;
    } else {
      bound += std::min(wa, wb);
    }
  }
  return bound;
}

std::int64_t bb_estimate(const BipartitionProblem& p, std::uint32_t mask_a, std::uint32_t mask_b) {
  std::int64_t est = bb_lower_bound(p, mask_a, mask_b);
  const bool a_full = std::popcount(mask_a) == static_cast<int>(p.k1);
  const bool b_full = std::popcount(mask_b) == static_cast<int>(p.k2);
  if (a_full || b_full) return est;  // forced vertices carry no uncertainty
  const std::uint32_t all = p.n == 32 ? ~std::uint32_t{0} : ((std::uint32_t{1} << p.n) - 1);
  for (std::uint32_t rest = all & ~(mask_a | mask_b); rest;) {
    const unsigned v = static_cast<unsigned>(std::countr_zero(rest));
    rest &= rest - 1;
    const std::int64_t wa = side_weight(p, v, mask_a);
    const std::int64_t wb = side_weight(p, v, mask_b);
    est += (wa + wb) / 2 - std::min(wa, wb);
  }
  return est;
}

unsigned bb_estimated_depth(std::int64_t upper_bound, std::int64_t lower_bound,
                            std::int64_t avg_node_contribution, unsigned free_count) {
  if (upper_bound <= lower_bound) return 0;
  const std::int64_t per_node = std::max<std::int64_t>(1, avg_node_contribution);
  const std::int64_t d = (upper_bound - lower_bound) / per_node;
  if (d < 0) return 0;
  return static_cast<unsigned>(std::min<std::int64_t>(d, free_count));
}

BipartitionResult bb_solve(const BipartitionProblem& p, const SchedulerConfig& config,
                           KernelMode mode, PlaceMetrics* metrics_out) {
  validate(p);
  BipartitionResult result;
  if (p.n == 0) {
    result.valid = true;
    return result;
  }

  StrategyRegistry reg;
  BBContext ctx;
  ctx.p = &p;
  ctx.mode = mode;
  ctx.type = register_bb_strategy(reg);
  ctx.all_mask = p.n == 32 ? ~std::uint32_t{0} : ((std::uint32_t{1} << p.n) - 1);
  std::int64_t total_weight = 0;
  for (unsigned i = 0; i < p.n; ++i) {
    for (unsigned j = i + 1; j < p.n; ++j) total_weight += p.w(i, j);
  }
  ctx.avg_contrib = std::max<std::int64_t>(1, 2 * total_weight / p.n);

  Scheduler sched(config, reg);
  ctx.start = Clock::now();
  sched.run([&] {
    if (p.k1 == 0 || p.k2 == 0) {
      // One set is empty; the unique partition has no cut edges.
      update_solution(&ctx, 0, p.k1 == 0 ? 0 : ctx.all_mask);
      return;
    }
    const std::int64_t lb0 = bb_lower_bound(p, 0, 0);
    const std::int64_t est0 = bb_estimate(p, 0, 0);
    spawn_s(bb_descriptor(&ctx, est0, lb0, p.n), [&ctx, lb0] { bb_task(&ctx, 0, 0, lb0); });
  });
  result.wall_ms = ms_since(ctx.start);

  result.best_cut = ctx.best_recorded;
  result.best_mask_a = ctx.best_mask;
  result.nodes_expanded = ctx.nodes.load();
  result.time_to_optimum_ms = ctx.tto_ms;
  result.valid = std::popcount(result.best_mask_a) == static_cast<int>(p.k1) &&
                 (result.best_mask_a & ~ctx.all_mask) == 0 &&
                 bipartition_cut(p, result.best_mask_a) == result.best_cut;
  if (metrics_out) *metrics_out = sched.metrics();
  return result;
}

std::int64_t brute_force_bipartition(const BipartitionProblem& p) {
  validate(p);
  if (p.n > 24) throw std::invalid_argument("brute force limited to n <= 24");
  if (p.n == 0) return 0;
  const std::uint32_t limit = std::uint32_t{1} << p.n;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    if (std::popcount(mask) != static_cast<int>(p.k1)) continue;
    best = std::min(best, bipartition_cut(p, mask));
  }
  return best;
}

}  // namespace stratsched::kernels
