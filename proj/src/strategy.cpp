#include "stratsched/strategy.hpp"

#include <stdexcept>
#include <tuple>

namespace stratsched {

std::weak_ordering lifo_fifo_order(const StrategyDescriptor& a, const StrategyDescriptor& b,
                                   const PriorityContext& ctx) {
  const bool la = ctx.local(a);
  const bool lb = ctx.local(b);
  if (la != lb) return la ? std::weak_ordering::less : std::weak_ordering::greater;
  if (la) {
    // Both spawned here: newest first.
    return b.seq <=> a.seq;
  }
  // Both remote: oldest first; spawn place breaks cross-place seq ties.
  return std::tie(a.seq, a.spawn_place) <=> std::tie(b.seq, b.spawn_place);
}

StrategyRegistry::StrategyRegistry() {
  TypeInfo root;
  root.name = "lifo_fifo";
  root.parent = kRootStrategy;
  root.depth = 0;
  types_.push_back(std::move(root));
}

TypeId StrategyRegistry::register_type(TypeId parent, std::string name, PriorityFn prioritize,
                                       DeadFn dead,
                                       std::vector<std::pair<TypeId, ProjectFn>> projections) {
  if (parent >= types_.size()) throw std::invalid_argument("unknown parent strategy type");
  for (const auto& [ancestor, fn] : projections) {
    if (!fn) throw std::invalid_argument("null projection");
    if (!is_ancestor(ancestor, parent) && ancestor != parent) {
      throw std::invalid_argument("projection target is not an ancestor");
    }
  }
  TypeInfo info;
  info.name = std::move(name);
  info.parent = parent;
  info.depth = types_[parent].depth + 1;
  info.prioritize = std::move(prioritize);
  info.dead = std::move(dead);
  info.projections = std::move(projections);
  const TypeId id = static_cast<TypeId>(types_.size());
  types_.push_back(std::move(info));
  types_[parent].children.push_back(id);
  return id;
}

bool StrategyRegistry::is_ancestor(TypeId ancestor, TypeId t) const {
  if (ancestor >= types_.size() || t >= types_.size()) throw std::out_of_range("unknown type");
  while (t != ancestor && t != kRootStrategy) t = types_[t].parent;
  return t == ancestor;
}

TypeId StrategyRegistry::lca(TypeId a, TypeId b) const {
  if (a >= types_.size() || b >= types_.size()) throw std::out_of_range("unknown type");
  while (types_[a].depth > types_[b].depth) a = types_[a].parent;
  while (types_[b].depth > types_[a].depth) b = types_[b].parent;
  while (a != b) {
    a = types_[a].parent;
    b = types_[b].parent;
  }
  return a;
}

bool StrategyRegistry::dead(const StrategyDescriptor& d) const {
  const auto& fn = types_.at(d.type).dead;
  return fn ? fn(d) : false;
}

Payload StrategyRegistry::project(const StrategyDescriptor& d, TypeId ancestor) const {
  if (d.type == ancestor) return d.payload;
  for (const auto& [target, fn] : types_.at(d.type).projections) {
    if (target == ancestor) return fn(d);
  }
  return Payload{};
}

std::weak_ordering StrategyRegistry::compare_at(TypeId node, const StrategyDescriptor& a,
                                                const StrategyDescriptor& b,
                                                const PriorityContext& ctx) const {
  const auto& fn = types_.at(node).prioritize;
  if (fn) {
    StrategyDescriptor pa = a;
    pa.payload = project(a, node);
    StrategyDescriptor pb = b;
    pb.payload = project(b, node);
    const auto cmp = fn(pa, pb, ctx);
    if (cmp != std::weak_ordering::equivalent) return cmp;
  }
  return lifo_fifo_order(a, b, ctx);
}

std::weak_ordering StrategyRegistry::compare_cross_type(const StrategyDescriptor& a,
                                                        const StrategyDescriptor& b,
                                                        const PriorityContext& ctx) const {
  return compare_at(a.type == b.type ? a.type : lca(a.type, b.type), a, b, ctx);
}

TypeId DepthFirstStrategy::register_type(StrategyRegistry& reg) {
  return reg.register_type(
      kRootStrategy, "depth_first",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext& ctx) {
        const bool la = ctx.local(a);
        const bool lb = ctx.local(b);
        if (la != lb) return la ? std::weak_ordering::less : std::weak_ordering::greater;
        const std::int64_t da = a.payload.slot[kDepthSlot];
        const std::int64_t db = b.payload.slot[kDepthSlot];
        // Deep tasks first at home; shallow (heavy) tasks first for thieves.
        return la ? std::weak_ordering(db <=> da) : std::weak_ordering(da <=> db);
      });
}

StrategyDescriptor DepthFirstStrategy::descriptor(TypeId type, unsigned depth,
                                                  unsigned max_depth) {
  if (depth > max_depth) throw std::invalid_argument("depth exceeds max_depth");
  StrategyDescriptor d;
  d.type = type;
  d.allow_call_conversion = true;
  d.transitive_weight = std::uint64_t{1} << std::min(max_depth - depth, 62u);
  d.payload.slot[kDepthSlot] = depth;
  return d;
}

}  // namespace stratsched
