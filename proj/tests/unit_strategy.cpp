#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>
#include <tuple>

#include "stratsched/strategy.hpp"
#include "support/reference_order.hpp"

using namespace stratsched;

namespace {

StrategyDescriptor task(TypeId type, PlaceId place, std::uint64_t seq, Payload payload = {}) {
  StrategyDescriptor d;
  d.type = type;
  d.spawn_place = place;
  d.seq = seq;
  d.payload = payload;
  return d;
}

Payload slot0(std::int64_t v) {
  Payload p;
  p.slot[0] = v;
  return p;
}

bool before(const StrategyRegistry& reg, const MachineTree& tree, PlaceId at,
            const StrategyDescriptor& a, const StrategyDescriptor& b) {
  return reg.runs_before(a, b, PriorityContext{at, &tree});
}

}  // namespace

TEST_CASE("root order: local over remote, local LIFO, remote FIFO") {
  StrategyRegistry reg;
  MachineTree tree({4});
  const auto local1 = task(kRootStrategy, 0, 1);
  const auto local2 = task(kRootStrategy, 0, 2);
  const auto remote1 = task(kRootStrategy, 1, 1);
  const auto remote5 = task(kRootStrategy, 2, 5);

  CHECK(before(reg, tree, 0, local1, remote5));
  CHECK(before(reg, tree, 0, local2, local1));   // newest local first
  CHECK_FALSE(before(reg, tree, 0, local1, local2));
  CHECK(before(reg, tree, 0, remote1, remote5)); // oldest remote first
  // Same tasks seen from place 1: the "remote1" task is now local.
  CHECK(before(reg, tree, 1, remote1, local2));
}

TEST_CASE("remote seq ties break on spawn place, deterministically") {
  StrategyRegistry reg;
  MachineTree tree({4});
  const auto a = task(kRootStrategy, 1, 7);
  const auto b = task(kRootStrategy, 2, 7);
  CHECK(before(reg, tree, 0, a, b));
  CHECK_FALSE(before(reg, tree, 0, b, a));
}

TEST_CASE("depth-first example strategy follows the divide-and-conquer rules") {
  StrategyRegistry reg;
  MachineTree tree({4});
  const TypeId df = DepthFirstStrategy::register_type(reg);

  auto at_depth = [&](PlaceId place, std::uint64_t seq, unsigned depth) {
    StrategyDescriptor d = DepthFirstStrategy::descriptor(df, depth, 10);
    d.spawn_place = place;
    d.seq = seq;
    return d;
  };

  SUBCASE("weight halves per level and conversion is allowed") {
    const auto d = at_depth(0, 0, 3);
    CHECK(d.transitive_weight == 128);  // 2^(10-3)
    CHECK(d.allow_call_conversion);
    CHECK(at_depth(0, 0, 10).transitive_weight == 1);
    CHECK_THROWS_AS(DepthFirstStrategy::descriptor(df, 11, 10), std::invalid_argument);
  }
  SUBCASE("both local: deeper first") {
    CHECK(before(reg, tree, 0, at_depth(0, 1, 3), at_depth(0, 2, 1)));
    CHECK_FALSE(before(reg, tree, 0, at_depth(0, 1, 1), at_depth(0, 2, 3)));
  }
  SUBCASE("local beats remote regardless of depth") {
    CHECK(before(reg, tree, 0, at_depth(0, 1, 1), at_depth(1, 2, 9)));
  }
  SUBCASE("both remote: shallower first") {
    CHECK(before(reg, tree, 2, at_depth(0, 1, 1), at_depth(1, 2, 3)));
    CHECK_FALSE(before(reg, tree, 2, at_depth(0, 1, 3), at_depth(1, 2, 1)));
  }
  SUBCASE("equal depth falls back to LIFO locally") {
    CHECK(before(reg, tree, 0, at_depth(0, 2, 4), at_depth(0, 1, 4)));
  }
}

TEST_CASE("hierarchy bookkeeping: parents, ancestors, lowest common ancestor") {
  StrategyRegistry reg;
  const TypeId fifo = reg.register_type(kRootStrategy, "fifo");
  const TypeId promising = reg.register_type(kRootStrategy, "most_promising");
  const TypeId algx = reg.register_type(kRootStrategy, "algx");
  const TypeId algx_sort = reg.register_type(algx, "algx_sort");
  const TypeId algx_filter = reg.register_type(algx, "algx_filter");

  CHECK(reg.parent(algx_sort) == algx);
  CHECK(reg.is_ancestor(kRootStrategy, algx_filter));
  CHECK(reg.is_ancestor(algx, algx_sort));
  CHECK_FALSE(reg.is_ancestor(algx_sort, algx));
  CHECK_FALSE(reg.is_ancestor(fifo, promising));
  CHECK(reg.lca(algx_sort, algx_filter) == algx);
  CHECK(reg.lca(algx_sort, fifo) == kRootStrategy);
  CHECK(reg.lca(algx, algx_sort) == algx);
  CHECK(reg.lca(promising, promising) == promising);

  CHECK_THROWS_AS(reg.register_type(99, "orphan"), std::invalid_argument);
}

TEST_CASE("cross-type pairs compare at the lowest common ancestor") {
  StrategyRegistry reg;
  MachineTree tree({4});
  const TypeId fifo = reg.register_type(
      kRootStrategy, "fifo",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext&) {
        return std::tie(a.seq, a.spawn_place) <=> std::tie(b.seq, b.spawn_place);
      });

  // FIFO task seq 1 vs root task seq 2, both local: compared at the root,
  // where LIFO prefers the newer root task.
  const auto f = task(fifo, 0, 1);
  const auto r = task(kRootStrategy, 0, 2);
  CHECK(before(reg, tree, 0, r, f));
  CHECK_FALSE(before(reg, tree, 0, f, r));
}

TEST_CASE("same-type tasks use their own comparator, not the ancestor's") {
  StrategyRegistry reg;
  MachineTree tree({4});
  const TypeId fifo = reg.register_type(
      kRootStrategy, "fifo",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext&) {
        return std::tie(a.seq, a.spawn_place) <=> std::tie(b.seq, b.spawn_place);
      });
  // Local LIFO would prefer seq 5; FIFO prefers seq 1.
  CHECK(before(reg, tree, 0, task(fifo, 0, 1), task(fifo, 0, 5)));
}

TEST_CASE("projections rewrite payloads for the ancestor's comparator") {
  StrategyRegistry reg;
  MachineTree tree({4});
  // Parent ranks by slot0 ascending; the children project differently.
  const TypeId parent = reg.register_type(
      kRootStrategy, "parent",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext&) {
        return a.payload.slot[0] <=> b.payload.slot[0];
      });
  const TypeId scaled = reg.register_type(
      parent, "scaled", {}, {},
      {{parent, [](const StrategyDescriptor& d) { return Payload{{d.payload.slot[0] * 10}}; }}});
  const TypeId shifted = reg.register_type(
      parent, "shifted", {}, {},
      {{parent, [](const StrategyDescriptor& d) { return Payload{{d.payload.slot[0] + 5}}; }}});

  // scaled 1 -> 10, shifted 2 -> 7: shifted wins at the parent.
  CHECK(before(reg, tree, 0, task(shifted, 0, 1, slot0(2)), task(scaled, 0, 2, slot0(1))));
  // scaled 0 -> 0 beats shifted 2 -> 7.
  CHECK(before(reg, tree, 0, task(scaled, 0, 1, slot0(0)), task(shifted, 0, 2, slot0(2))));
  CHECK(reg.project(task(scaled, 0, 1, slot0(3)), parent).slot[0] == 30);
  // Identity projection onto the task's own type.
  CHECK(reg.project(task(scaled, 0, 1, slot0(3)), scaled).slot[0] == 3);
  // Default projection: empty payload.
  CHECK(reg.project(task(scaled, 0, 1, slot0(3)), kRootStrategy).slot[0] == 0);

  CHECK_THROWS_AS(reg.register_type(parent, "bad", {}, {},
                                    {{scaled, [](const StrategyDescriptor&) { return Payload{}; }}}),
                  std::invalid_argument);
}

TEST_CASE("comparators can rank by memory distance") {
  StrategyRegistry reg;
  MachineTree tree({2, 2});
  const TypeId near_first = reg.register_type(
      kRootStrategy, "near_first",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext& ctx) {
        return ctx.distance(a) <=> ctx.distance(b);
      });
  const auto near = task(near_first, 1, 1);
  const auto far = task(near_first, 2, 2);
  CHECK(before(reg, tree, 0, near, far));
  CHECK(before(reg, tree, 3, far, near));
}

TEST_CASE("dead predicate defaults to false and is consulted per type") {
  StrategyRegistry reg;
  const TypeId doomed = reg.register_type(kRootStrategy, "doomed", {},
                                          [](const StrategyDescriptor& d) {
                                            return d.payload.slot[0] > 10;
                                          });
  CHECK_FALSE(reg.dead(task(kRootStrategy, 0, 1)));
  CHECK_FALSE(reg.dead(task(doomed, 0, 1, slot0(3))));
  CHECK(reg.dead(task(doomed, 0, 1, slot0(11))));
}

TEST_CASE("grouped set order: same-type tasks emit contiguously") {
  StrategyRegistry reg;
  MachineTree tree({4});
  const TypeId fifo = reg.register_type(
      kRootStrategy, "fifo",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext&) {
        return std::tie(a.seq, a.spawn_place) <=> std::tie(b.seq, b.spawn_place);
      });

  // f1 seq 1, r seq 2, f2 seq 3, all local. The FIFO group is represented by
  // f1, which loses to r under root LIFO; the group stays together.
  const std::vector<StrategyDescriptor> tasks = {task(fifo, 0, 1), task(kRootStrategy, 0, 2),
                                                 task(fifo, 0, 3)};
  const auto order = stratsched_test::reference_order(reg, tree, 0, tasks);
  CHECK(order == std::vector<std::size_t>{1, 0, 2});
  CHECK(stratsched_test::grouping_holds(reg, tasks, order));
}

TEST_CASE("group rank follows the group's best member") {
  StrategyRegistry reg;
  MachineTree tree({4});
  const TypeId promising = reg.register_type(
      kRootStrategy, "most_promising",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext&) {
        return b.payload.slot[0] <=> a.payload.slot[0];  // larger promise first
      });

  // m1 (seq 5, promise 9) represents the group and beats r (seq 3) at the
  // root; m2 (seq 1, promise 2) would lose alone but rides along.
  const std::vector<StrategyDescriptor> tasks = {task(promising, 0, 5, slot0(9)),
                                                 task(promising, 0, 1, slot0(2)),
                                                 task(kRootStrategy, 0, 3)};
  const auto order = stratsched_test::reference_order(reg, tree, 0, tasks);
  CHECK(order == std::vector<std::size_t>{0, 1, 2});
  CHECK(stratsched_test::grouping_holds(reg, tasks, order));
}

TEST_CASE("pairwise comparison is antisymmetric and a total order on distinct tasks") {
  StrategyRegistry reg;
  MachineTree tree({2, 2});
  const TypeId fifo = reg.register_type(
      kRootStrategy, "fifo",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext&) {
        return std::tie(a.seq, a.spawn_place) <=> std::tie(b.seq, b.spawn_place);
      });
  const TypeId promising = reg.register_type(
      kRootStrategy, "most_promising",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext&) {
        return b.payload.slot[0] <=> a.payload.slot[0];
      });

  std::mt19937_64 rng(99);
  std::vector<StrategyDescriptor> tasks;
  const TypeId types[] = {kRootStrategy, fifo, promising};
  for (std::uint64_t i = 0; i < 40; ++i) {
    tasks.push_back(task(types[rng() % 3], static_cast<PlaceId>(rng() % 4), i,
                         slot0(static_cast<std::int64_t>(rng() % 8))));
  }
  for (PlaceId at = 0; at < 4; ++at) {
    const PriorityContext ctx{at, &tree};
    for (const auto& a : tasks) {
      CHECK(reg.compare_cross_type(a, a, ctx) == std::weak_ordering::equivalent);
      for (const auto& b : tasks) {
        if (a.seq == b.seq && a.spawn_place == b.spawn_place) continue;
        const auto ab = reg.compare_cross_type(a, b, ctx);
        const auto ba = reg.compare_cross_type(b, a, ctx);
        CHECK(ab != std::weak_ordering::equivalent);
        CHECK((ab == std::weak_ordering::less) == (ba == std::weak_ordering::greater));
      }
    }
    // Transitivity within one type and among pure root tasks.
    for (const auto& a : tasks) {
      for (const auto& b : tasks) {
        for (const auto& c : tasks) {
          const bool same_kind = (a.type == b.type && b.type == c.type);
          if (!same_kind) continue;
          if (reg.runs_before(a, b, ctx) && reg.runs_before(b, c, ctx)) {
            CHECK(reg.runs_before(a, c, ctx));
          }
        }
      }
    }
  }
}
