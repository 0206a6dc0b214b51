#include "stratsched/kernels/tristrip.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "stratsched/kernels/uts.hpp"  // uts_mix64: the shared 64-bit finalizer

namespace stratsched::kernels {

namespace {

constexpr std::size_t kSpawnSplit = 64;  // intervals longer than this split in two

struct TriStripContext {
  const TriangleMesh* mesh = nullptr;
  KernelMode mode = KernelMode::kStrategy;
  TypeId start_type = kRootStrategy;
  TypeId spawn_type = kRootStrategy;
  std::uint64_t seed = 0;
  std::unique_ptr<std::atomic<std::uint8_t>[]> in_strip;
  std::mutex strips_mtx;
  std::vector<std::vector<std::uint32_t>> strips;

  bool claim(std::uint32_t t) {
    std::uint8_t expect = 0;
    return in_strip[t].compare_exchange_strong(expect, 1, std::memory_order_relaxed);
  }
  bool claimed(std::uint32_t t) const {
    return in_strip[t].load(std::memory_order_relaxed) != 0;
  }
  unsigned live_neighbors(std::uint32_t t) const {
    unsigned live = 0;
    for (std::int32_t n : mesh->neighbors[t]) {
      if (n >= 0 && !claimed(static_cast<std::uint32_t>(n))) ++live;
    }
    return live;
  }

  void start_task(std::uint32_t tri);
  void spawn_task(std::uint32_t begin, std::uint32_t end);
  void emit_start(std::uint32_t tri);
  void emit_spawn(std::uint32_t begin, std::uint32_t end);
};

// Next strip member from `tri`: the unclaimed neighbor with the fewest
// unclaimed neighbors of its own, ties to the lowest index. Claims it.
bool extend_once(TriStripContext* c, std::uint32_t tri, std::uint32_t* out) {
  for (;;) {
    std::int32_t best = -1;
    unsigned best_live = 0;
    for (std::int32_t n : c->mesh->neighbors[tri]) {
      if (n < 0 || c->claimed(static_cast<std::uint32_t>(n))) continue;
      const unsigned live = c->live_neighbors(static_cast<std::uint32_t>(n));
      if (best < 0 || live < best_live) {
        best = n;
        best_live = live;
      }
    }
    if (best < 0) return false;
    if (c->claim(static_cast<std::uint32_t>(best))) {
      *out = static_cast<std::uint32_t>(best);
      return true;
    }
    // Lost the race for that neighbor; rescan what is left.
  }
}

void TriStripContext::start_task(std::uint32_t tri) {
  if (!claim(tri)) return;  // somebody's strip already took this seed
  std::vector<std::uint32_t> strip{tri};
  std::uint32_t next = 0;
  while (extend_once(this, strip.back(), &next)) strip.push_back(next);
  std::vector<std::uint32_t> front;
  while (extend_once(this, front.empty() ? tri : front.back(), &next)) front.push_back(next);
  if (!front.empty()) {
    std::reverse(front.begin(), front.end());
    front.insert(front.end(), strip.begin(), strip.end());
    strip.swap(front);
  }
  std::lock_guard<std::mutex> lk(strips_mtx);
  strips.push_back(std::move(strip));
}

void TriStripContext::spawn_task(std::uint32_t begin, std::uint32_t end) {
  if (end - begin > kSpawnSplit) {
    const std::uint32_t mid = begin + (end - begin) / 2;
    emit_spawn(begin, mid);
    emit_spawn(mid, end);
    return;
  }
  for (std::uint32_t t = begin; t < end; ++t) {
    if (!claimed(t)) emit_start(t);
  }
}

void TriStripContext::emit_start(std::uint32_t tri) {
  StrategyDescriptor d;
  if (mode == KernelMode::kStrategy) {
    d.type = start_type;
    d.allow_call_conversion = true;
    d.payload.slot[0] = live_neighbors(tri);
    d.payload.slot[1] = static_cast<std::int64_t>(uts_mix64(seed ^ tri) >> 1);
    d.payload.slot[2] = std::bit_cast<std::int64_t>(in_strip.get());
    d.payload.slot[3] = tri;
  }
  TriStripContext* self = this;
  spawn_s(d, [self, tri] { self->start_task(tri); });
}

void TriStripContext::emit_spawn(std::uint32_t begin, std::uint32_t end) {
  StrategyDescriptor d;
  if (mode == KernelMode::kStrategy) {
    d.type = spawn_type;
    d.transitive_weight = end - begin;
    d.payload.slot[0] = begin;
    d.payload.slot[1] = end;
  }
  TriStripContext* self = this;
  spawn_s(d, [self, begin, end] { self->spawn_task(begin, end); });
}

void register_tristrip_strategies(StrategyRegistry& reg, TriStripContext& ctx) {
  // Parent node: ranks the Start group against the Spawn group. Children
  // project onto it as a single "kind" value, 0 for Start and 1 for Spawn.
  const TypeId parent = reg.register_type(
      kRootStrategy, "tristrip",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext& ctx) {
        const bool la = ctx.local(a);
        const bool lb = ctx.local(b);
        if (la != lb) return la ? std::weak_ordering::less : std::weak_ordering::greater;
        if (la) return std::weak_ordering(a.payload.slot[0] <=> b.payload.slot[0]);
        return std::weak_ordering(b.payload.slot[0] <=> a.payload.slot[0]);
      });
  ctx.start_type = reg.register_type(
      parent, "tristrip_start",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext&) {
        // Strip seeds with few unclaimed neighbors first; random tiebreak.
        return std::weak_ordering(std::tie(a.payload.slot[0], a.payload.slot[1]) <=>
                                  std::tie(b.payload.slot[0], b.payload.slot[1]));
      },
      [](const StrategyDescriptor& d) {
        const auto* flags = std::bit_cast<const std::atomic<std::uint8_t>*>(d.payload.slot[2]);
        return flags[d.payload.slot[3]].load(std::memory_order_relaxed) != 0;
      },
      {{kRootStrategy, [](const StrategyDescriptor&) { return Payload{{0, 0, 0, 0}}; }}});
  ctx.spawn_type = reg.register_type(
      parent, "tristrip_spawn", {}, {},
      {{kRootStrategy, [](const StrategyDescriptor&) { return Payload{{1, 0, 0, 0}}; }}});
}

}  // namespace

TriangleMesh build_mesh(std::vector<std::array<std::uint32_t, 3>> triangles) {
  TriangleMesh mesh;
  mesh.triangles = std::move(triangles);
  mesh.neighbors.assign(mesh.triangles.size(), {-1, -1, -1});
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> edge_tris;
  for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      const std::uint32_t a = tri[e];
      const std::uint32_t b = tri[(e + 1) % 3];
      if (a == b) throw std::invalid_argument("mesh: degenerate triangle edge");
      edge_tris[{std::min(a, b), std::max(a, b)}].push_back(t);
    }
  }
  auto add_neighbor = [&](std::uint32_t t, std::uint32_t n) {
    for (auto& slot : mesh.neighbors[t]) {
      if (slot == static_cast<std::int32_t>(n)) return;  // already linked
      if (slot < 0) {
        slot = static_cast<std::int32_t>(n);
        return;
      }
    }
    throw std::invalid_argument("mesh: triangle with more than three neighbors");
  };
  for (const auto& [edge, tris] : edge_tris) {
    if (tris.size() > 2) throw std::invalid_argument("mesh: edge shared by more than two triangles");
    if (tris.size() == 2) {
      add_neighbor(tris[0], tris[1]);
      add_neighbor(tris[1], tris[0]);
    }
  }
  return mesh;
}

TriangleMesh grid_mesh(unsigned g) {
  std::vector<std::array<std::uint32_t, 3>> tris;
  tris.reserve(static_cast<std::size_t>(g) * g * 2);
  const unsigned stride = g + 1;
  for (unsigned r = 0; r < g; ++r) {
    for (unsigned c = 0; c < g; ++c) {
      const std::uint32_t v00 = r * stride + c;
      const std::uint32_t v01 = v00 + 1;
      const std::uint32_t v10 = v00 + stride;
      const std::uint32_t v11 = v10 + 1;
      tris.push_back({v00, v01, v11});
      tris.push_back({v00, v11, v10});
    }
  }
  return build_mesh(std::move(tris));
}

TriangleMesh planar_mesh(unsigned g, std::uint64_t seed) {
  std::vector<std::array<std::uint32_t, 3>> tris;
  tris.reserve(static_cast<std::size_t>(g) * g * 2);
  const unsigned stride = g + 1;
  std::mt19937_64 rng(seed);
  for (unsigned r = 0; r < g; ++r) {
    for (unsigned c = 0; c < g; ++c) {
      const std::uint32_t v00 = r * stride + c;
      const std::uint32_t v01 = v00 + 1;
      const std::uint32_t v10 = v00 + stride;
      const std::uint32_t v11 = v10 + 1;
      if (rand_below(rng, 2) == 0) {
        tris.push_back({v00, v01, v11});
        tris.push_back({v00, v11, v10});
      } else {
        tris.push_back({v00, v01, v10});
        tris.push_back({v01, v11, v10});
      }
    }
  }
  return build_mesh(std::move(tris));
}

TriangleMesh parse_mesh_text(const std::string& text) {
  std::istringstream in(text);
  std::size_t count = 0;
  if (!(in >> count)) throw std::invalid_argument("mesh text: missing triangle count");
  std::vector<std::array<std::uint32_t, 3>> tris(count);
  for (auto& tri : tris) {
    if (!(in >> tri[0] >> tri[1] >> tri[2])) {
      throw std::invalid_argument("mesh text: truncated triangle list");
    }
  }
  return build_mesh(std::move(tris));
}

TriStripResult tristrip_run(const TriangleMesh& mesh, const SchedulerConfig& config,
                            KernelMode mode, std::uint64_t seed, PlaceMetrics* metrics_out) {
  const std::size_t n = mesh.triangle_count();
  if (mesh.neighbors.size() != n) throw std::invalid_argument("mesh: adjacency missing");

  StrategyRegistry reg;
  TriStripContext ctx;
  ctx.mesh = &mesh;
  ctx.mode = mode;
  ctx.seed = seed;
  register_tristrip_strategies(reg, ctx);
  ctx.in_strip = std::make_unique<std::atomic<std::uint8_t>[]>(n == 0 ? 1 : n);
  for (std::size_t i = 0; i < n; ++i) ctx.in_strip[i].store(0, std::memory_order_relaxed);

  Scheduler sched(config, reg);
  const auto start = std::chrono::steady_clock::now();
  sched.run([&] {
    if (n > 0) ctx.emit_spawn(0, static_cast<std::uint32_t>(n));
  });
  TriStripResult result;
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  result.strips = std::move(ctx.strips);
  if (metrics_out) *metrics_out = sched.metrics();
  return result;
}

bool verify_strips(const TriangleMesh& mesh,
                   const std::vector<std::vector<std::uint32_t>>& strips) {
  const std::size_t n = mesh.triangle_count();
  std::vector<bool> seen(n, false);
  std::size_t covered = 0;
  for (const auto& strip : strips) {
    if (strip.empty()) return false;
    for (std::size_t i = 0; i < strip.size(); ++i) {
      const std::uint32_t t = strip[i];
      if (t >= n || seen[t]) return false;
      seen[t] = true;
      ++covered;
      if (i > 0) {
        const auto& nb = mesh.neighbors[strip[i - 1]];
        if (std::find(nb.begin(), nb.end(), static_cast<std::int32_t>(t)) == nb.end()) {
          return false;
        }
      }
    }
  }
  return covered == n;
}

}  // namespace stratsched::kernels
