#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "stratsched/machine_tree.hpp"

namespace stratsched {

using TypeId = std::uint16_t;

// The pre-registered root strategy: plain LIFO/FIFO work stealing. Owners pop
// their newest local task first; remote tasks are taken oldest first; local
// tasks outrank remote ones.
inline constexpr TypeId kRootStrategy = 0;

// Strategy-specific comparison data carried by a task. Slot meaning is
// private to the strategy type owning the descriptor (or, for a projected
// descriptor, to the ancestor type the projection targets). Pointers into
// shared kernel state are stored bit-cast into a slot.
struct Payload {
  std::array<std::int64_t, 4> slot{};
};

// Immutable per-task scheduling data, fixed at spawn time.
struct StrategyDescriptor {
  TypeId type = kRootStrategy;
  bool allow_call_conversion = false;
  PlaceId spawn_place = 0;
  std::uint64_t seq = 0;               // unique per spawn place, monotone
  std::uint64_t transitive_weight = 1; // estimated subtree work, >= 1
  Payload payload{};
};

// Where a comparison is being evaluated plus the machine model, so
// comparators can ask how far a task's spawn place is from here.
struct PriorityContext {
  PlaceId at = 0;
  const MachineTree* tree = nullptr;

  bool local(const StrategyDescriptor& d) const noexcept { return d.spawn_place == at; }
  unsigned distance(const StrategyDescriptor& d) const {
    return tree->memory_distance(d.spawn_place, at);
  }
};

// less: a runs first. greater: b runs first. equivalent: defer to the
// LIFO/FIFO tie-break on (spawn_place, seq).
using PriorityFn = std::function<std::weak_ordering(
    const StrategyDescriptor&, const StrategyDescriptor&, const PriorityContext&)>;

// True when the task's result can no longer matter and it may be dropped
// without executing. Must be monotone: once dead, always dead.
using DeadFn = std::function<bool(const StrategyDescriptor&)>;

// Rewrites a descriptor's payload into the shape an ancestor's comparator
// expects. Identity fields (spawn_place, seq, weight) are never projected.
using ProjectFn = std::function<Payload(const StrategyDescriptor&)>;

// Deterministic total order on distinct tasks at a place: local before
// remote, local ties newest-first (LIFO), remote ties oldest-first (FIFO).
std::weak_ordering lifo_fifo_order(const StrategyDescriptor& a, const StrategyDescriptor& b,
                                   const PriorityContext& ctx);

// The strategy type hierarchy: a rooted tree of types, each with an optional
// comparator, dead predicate, and projections onto its ancestors. Built up
// front; immutable while a scheduler is running.
class StrategyRegistry {
public:
  StrategyRegistry();

  TypeId register_type(TypeId parent, std::string name, PriorityFn prioritize = {},
                       DeadFn dead = {},
                       std::vector<std::pair<TypeId, ProjectFn>> projections = {});

  std::size_t type_count() const noexcept { return types_.size(); }
  const std::string& name(TypeId t) const { return types_.at(t).name; }
  TypeId parent(TypeId t) const { return types_.at(t).parent; }
  const std::vector<TypeId>& children(TypeId t) const { return types_.at(t).children; }
  bool is_ancestor(TypeId ancestor, TypeId t) const;
  TypeId lca(TypeId a, TypeId b) const;

  bool dead(const StrategyDescriptor& d) const;

  // Payload of `d` as seen by `ancestor`'s comparator. Identity if the task
  // already has that type; the registered projection otherwise; an empty
  // payload when none was registered (the default projection keeps only the
  // identity fields, which every comparator can rely on).
  Payload project(const StrategyDescriptor& d, TypeId ancestor) const;

  // Total order among descriptors compared at type node `node` (descriptors
  // are projected onto `node` first). Comparator ties fall through to
  // LIFO/FIFO on the original (spawn_place, seq).
  std::weak_ordering compare_at(TypeId node, const StrategyDescriptor& a,
                                const StrategyDescriptor& b, const PriorityContext& ctx) const;

  // Pairwise cross-type comparison: same type compares directly, otherwise
  // both sides are projected onto their lowest common ancestor and compared
  // there. This is the two-task special case of the grouped set ordering.
  std::weak_ordering compare_cross_type(const StrategyDescriptor& a, const StrategyDescriptor& b,
                                        const PriorityContext& ctx) const;

  bool runs_before(const StrategyDescriptor& a, const StrategyDescriptor& b,
                   const PriorityContext& ctx) const {
    return compare_cross_type(a, b, ctx) == std::weak_ordering::less;
  }

private:
  struct TypeInfo {
    std::string name;
    TypeId parent = kRootStrategy;
    unsigned depth = 0;
    PriorityFn prioritize;
    DeadFn dead;
    std::vector<std::pair<TypeId, ProjectFn>> projections;
    std::vector<TypeId> children;
  };
  std::vector<TypeInfo> types_;
};

// Depth-first strategy for divide-and-conquer trees, shipped as the library
// example. Local tasks run deepest-first, steals take the shallowest task,
// weight halves per level, and spawns may convert to plain calls.
struct DepthFirstStrategy {
  static constexpr std::int64_t kDepthSlot = 0;

  static TypeId register_type(StrategyRegistry& reg);
  static StrategyDescriptor descriptor(TypeId type, unsigned depth, unsigned max_depth);
};

}  // namespace stratsched
