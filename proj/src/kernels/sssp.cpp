#include "stratsched/kernels/sssp.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <memory>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "stratsched/kernels/uts.hpp"  // uts_mix64: the shared 64-bit finalizer

namespace stratsched::kernels {

namespace {

struct SSSPContext {
  const Graph* g = nullptr;
  KernelMode mode = KernelMode::kStrategy;
  TypeId type = kRootStrategy;
  std::uint64_t key_seed = 0;
  std::unique_ptr<std::atomic<std::int64_t>[]> dist;

  void relax_from(std::uint32_t node, std::int64_t d);
  void spawn_task(std::uint32_t node, std::int64_t d);
};

void SSSPContext::spawn_task(std::uint32_t node, std::int64_t d) {
  StrategyDescriptor desc;
  if (mode == KernelMode::kStrategy) {
    desc.type = type;
    desc.payload.slot[0] = d;
    // Fresh pseudo-random steal key per task instance; >> 1 keeps the signed
    // comparison order identical to the unsigned one.
    desc.payload.slot[1] =
        static_cast<std::int64_t>(uts_mix64(key_seed ^ (std::uint64_t{node} << 32) ^
                                            static_cast<std::uint64_t>(d)) >>
                                  1);
    desc.payload.slot[2] = std::bit_cast<std::int64_t>(dist.get());
    desc.payload.slot[3] = node;
  }
  SSSPContext* self = this;
  spawn_s(desc, [self, node, d] { self->relax_from(node, d); });
}

void SSSPContext::relax_from(std::uint32_t node, std::int64_t d) {
  // The stored label may have improved since this task was queued; relaxing
  // from a stale distance would be wasted work (the baseline mode has no
  // dead-task elimination and fully relies on this recheck).
  if (dist[node].load(std::memory_order_relaxed) < d) return;
  const std::size_t begin = g->offsets[node];
  const std::size_t end = g->offsets[node + 1];
  for (std::size_t e = begin; e < end; ++e) {
    const std::uint32_t next = g->to[e];
    const std::int64_t nd = d + g->weight[e];
    std::int64_t cur = dist[next].load(std::memory_order_relaxed);
    while (nd < cur) {
      if (dist[next].compare_exchange_weak(cur, nd, std::memory_order_relaxed)) {
        spawn_task(next, nd);
        break;
      }
    }
  }
}

TypeId register_sssp_strategy(StrategyRegistry& reg) {
  return reg.register_type(
      kRootStrategy, "sssp_relax",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext& ctx) {
        const bool la = ctx.local(a);
        const bool lb = ctx.local(b);
        if (la != lb) return la ? std::weak_ordering::less : std::weak_ordering::greater;
        if (la) return std::weak_ordering(a.payload.slot[0] <=> b.payload.slot[0]);
        // Thieves spread randomly instead of chasing the same frontier.
        return std::weak_ordering(a.payload.slot[1] <=> b.payload.slot[1]);
      },
      [](const StrategyDescriptor& d) {
        const auto* dist = std::bit_cast<const std::atomic<std::int64_t>*>(d.payload.slot[2]);
        return dist[d.payload.slot[3]].load(std::memory_order_relaxed) < d.payload.slot[0];
      });
}

}  // namespace

Graph generate_graph(std::size_t n, unsigned density_pct, std::int64_t weight_max,
                     std::uint64_t seed) {
  if (weight_max < 1) throw std::invalid_argument("graph: weight_max must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rand_below(rng, 100) < density_pct) {
        const std::int64_t w = rand_range(rng, 1, weight_max);
        adj[i].emplace_back(static_cast<std::uint32_t>(j), w);
        adj[j].emplace_back(static_cast<std::uint32_t>(i), w);
      }
    }
  }
  Graph g;
  g.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.offsets[i + 1] = g.offsets[i] + adj[i].size();
  g.to.reserve(g.offsets[n]);
  g.weight.reserve(g.offsets[n]);
  for (const auto& edges : adj) {
    for (const auto& [to, w] : edges) {
      g.to.push_back(to);
      g.weight.push_back(w);
    }
  }
  return g;
}

Graph parse_graph_text(const std::string& text) {
  std::istringstream in(text);
  std::size_t n = 0, m = 0;
  if (!(in >> n >> m)) throw std::invalid_argument("graph text: missing 'n m' header");
  std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> adj(n);
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t from = 0, to = 0;
    std::int64_t w = 0;
    if (!(in >> from >> to >> w)) throw std::invalid_argument("graph text: truncated edge list");
    if (from >= n || to >= n) throw std::invalid_argument("graph text: vertex out of range");
    if (w < 0) throw std::invalid_argument("graph text: negative weight");
    adj[from].emplace_back(static_cast<std::uint32_t>(to), w);
  }
  Graph g;
  g.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.offsets[i + 1] = g.offsets[i] + adj[i].size();
  for (const auto& edges : adj) {
    for (const auto& [to, w] : edges) {
      g.to.push_back(to);
      g.weight.push_back(w);
    }
  }
  return g;
}

SSSPResult sssp_run(const Graph& g, std::uint32_t source, const SchedulerConfig& config,
                    KernelMode mode, PlaceMetrics* metrics_out) {
  const std::size_t n = g.node_count();
  if (source >= n) throw std::invalid_argument("sssp: source out of range");

  StrategyRegistry reg;
  SSSPContext ctx;
  ctx.g = &g;
  ctx.mode = mode;
  ctx.type = register_sssp_strategy(reg);
  ctx.key_seed = config.rng_seed;
  ctx.dist = std::make_unique<std::atomic<std::int64_t>[]>(n);
  for (std::size_t i = 0; i < n; ++i) ctx.dist[i].store(kUnreachable, std::memory_order_relaxed);
  ctx.dist[source].store(0, std::memory_order_relaxed);

  Scheduler sched(config, reg);
  const auto start = std::chrono::steady_clock::now();
  sched.run([&] { ctx.spawn_task(source, 0); });

  SSSPResult result;
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  result.dist.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.dist[i] = ctx.dist[i].load(std::memory_order_relaxed);
  if (metrics_out) *metrics_out = sched.metrics();
  return result;
}

std::vector<std::int64_t> dijkstra(const Graph& g, std::uint32_t source) {
  const std::size_t n = g.node_count();
  std::vector<std::int64_t> dist(n, kUnreachable);
  using Entry = std::pair<std::int64_t, std::uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  dist[source] = 0;
  pq.emplace(0, source);
  while (!pq.empty()) {
    const auto [d, node] = pq.top();
    pq.pop();
    if (d != dist[node]) continue;
    for (std::size_t e = g.offsets[node]; e < g.offsets[node + 1]; ++e) {
      const std::int64_t nd = d + g.weight[e];
      if (nd < dist[g.to[e]]) {
        dist[g.to[e]] = nd;
        pq.emplace(nd, g.to[e]);
      }
    }
  }
  return dist;
}

}  // namespace stratsched::kernels
