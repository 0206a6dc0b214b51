#include "stratsched/kernels/uts.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace stratsched::kernels {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;
constexpr unsigned kWeightCap = 30;
}  // namespace

std::uint64_t uts_mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

std::vector<std::uint64_t> uts_children(std::uint64_t state, unsigned depth,
                                        const UTSParams& params) {
  std::vector<std::uint64_t> out;
  if (depth >= params.h_max) return out;
  const double b = params.b0 * (1.0 - static_cast<double>(depth) / params.h_max);
  if (b <= 0.0) return out;
  // Geometric child count with mean b: p = 1/(1+b), k = floor(ln u / ln(1-p)).
  double u = static_cast<double>(uts_mix64(state) >> 11) * 0x1.0p-53;
  if (u <= 0.0) u = 0x1.0p-53;
  const double p = 1.0 / (1.0 + b);
  const double k = std::floor(std::log(u) / std::log(1.0 - p));
  unsigned count = params.m_max;
  if (k < static_cast<double>(params.m_max)) count = static_cast<unsigned>(k);
  out.reserve(count);
  for (unsigned i = 0; i < count; ++i) {
    out.push_back(uts_mix64(state ^ (kGolden * (i + 1))));
  }
  return out;
}

UTSKernel::UTSKernel(const UTSParams& params) : params_(params) {
  if (params_.b0 <= 0.0) throw std::invalid_argument("uts: b0 must be positive");
  if (params_.m_max == 0) throw std::invalid_argument("uts: m_max must be >= 1");
}

TypeId UTSKernel::register_with(StrategyRegistry& reg) {
  // No comparator: within the type, tasks fall through to the LIFO/FIFO
  // tie-break. The type still matters: its descriptors carry the exponential
  // weights that drive steal-half and call conversion, and in composed runs
  // it keeps the tree's tasks grouped apart from other kernels.
  type_ = reg.register_type(kRootStrategy, "uts_node");
  return type_;
}

void UTSKernel::spawn_child(std::uint64_t state, unsigned depth) {
  StrategyDescriptor d;
  if (mode_ == KernelMode::kStrategy) {
    d.type = type_;
    d.allow_call_conversion = params_.allow_conversion;
    d.transitive_weight = std::uint64_t{1}
                          << std::min(params_.h_max - depth, kWeightCap);
  }
  UTSKernel* self = this;
  spawn_s(d, [self, state, depth] { self->visit(state, depth); });
}

void UTSKernel::visit(std::uint64_t state, unsigned depth) {
  nodes_.fetch_add(1, std::memory_order_relaxed);
  if (depth >= params_.h_max) return;
  const std::vector<std::uint64_t> children = uts_children(state, depth, params_);
  for (std::uint64_t child : children) spawn_child(child, depth + 1);
}

void UTSKernel::launch(KernelMode mode) {
  mode_ = mode;
  spawn_child(params_.root_state, 0);
}

UTSResult uts_run(const UTSParams& params, const SchedulerConfig& config, KernelMode mode,
                  PlaceMetrics* metrics_out) {
  StrategyRegistry reg;
  UTSKernel kernel(params);
  kernel.register_with(reg);
  Scheduler sched(config, reg);
  const auto start = std::chrono::steady_clock::now();
  sched.run([&] { kernel.launch(mode); });
  UTSResult result;
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  result.node_count = kernel.node_count();
  if (metrics_out) *metrics_out = sched.metrics();
  return result;
}

std::uint64_t uts_count_sequential(const UTSParams& params) {
  std::uint64_t count = 0;
  // Explicit stack: the trees are deep and unbalanced.
  std::vector<std::pair<std::uint64_t, unsigned>> stack{{params.root_state, 0}};
  while (!stack.empty()) {
    const auto [state, depth] = stack.back();
    stack.pop_back();
    ++count;
    for (std::uint64_t child : uts_children(state, depth, params)) {
      stack.emplace_back(child, depth + 1);
    }
  }
  return count;
}

}  // namespace stratsched::kernels
