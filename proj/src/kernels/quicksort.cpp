#include "stratsched/kernels/quicksort.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <stdexcept>

namespace stratsched::kernels {

namespace {

struct QuicksortContext {
  std::int64_t* data = nullptr;
  std::size_t cutoff = 256;
  KernelMode mode = KernelMode::kStrategy;
  TypeId type = kRootStrategy;

  void sort_range(std::size_t lo, std::size_t hi);
  void spawn_range(std::size_t lo, std::size_t hi);
};

std::uint64_t range_weight(std::size_t len, std::size_t cutoff) {
  const std::uint64_t blocks = (len + cutoff - 1) / cutoff;
  const std::uint64_t log2_ceil = blocks <= 1 ? 0 : std::bit_width(blocks - 1);
  return std::max<std::uint64_t>(1, blocks * log2_ceil);
}

void QuicksortContext::spawn_range(std::size_t lo, std::size_t hi) {
  StrategyDescriptor d;
  if (mode == KernelMode::kStrategy) {
    d.type = type;
    d.allow_call_conversion = true;
    d.transitive_weight = range_weight(hi - lo, cutoff);
    d.payload.slot[0] = static_cast<std::int64_t>(hi - lo);
  }
  QuicksortContext* self = this;
  spawn_s(d, [self, lo, hi] { self->sort_range(lo, hi); });
}

void QuicksortContext::sort_range(std::size_t lo, std::size_t hi) {
  const std::size_t len = hi - lo;
  if (len <= cutoff) {
    std::sort(data + lo, data + hi);
    return;
  }
  // Median-of-three pivot, then a three-way split; the equal block never
  // recurses, so all-equal ranges terminate.
  std::int64_t a = data[lo];
  std::int64_t b = data[lo + len / 2];
  std::int64_t c = data[hi - 1];
  const std::int64_t pivot = std::max(std::min(a, b), std::min(std::max(a, b), c));
  std::int64_t* first = data + lo;
  std::int64_t* last = data + hi;
  std::int64_t* mid1 = std::partition(first, last, [pivot](std::int64_t x) { return x < pivot; });
  std::int64_t* mid2 = std::partition(mid1, last, [pivot](std::int64_t x) { return x == pivot; });
  const std::size_t left_end = static_cast<std::size_t>(mid1 - data);
  const std::size_t right_begin = static_cast<std::size_t>(mid2 - data);
  if (left_end > lo) spawn_range(lo, left_end);
  if (hi > right_begin) spawn_range(right_begin, hi);
}

TypeId register_quicksort_strategy(StrategyRegistry& reg) {
  return reg.register_type(
      kRootStrategy, "quicksort_range",
      [](const StrategyDescriptor& a, const StrategyDescriptor& b, const PriorityContext& ctx) {
        const bool la = ctx.local(a);
        const bool lb = ctx.local(b);
        if (la != lb) return la ? std::weak_ordering::less : std::weak_ordering::greater;
        // Short ranges finish fast locally; long ranges are worth shipping.
        if (la) return std::weak_ordering(a.payload.slot[0] <=> b.payload.slot[0]);
        return std::weak_ordering(b.payload.slot[0] <=> a.payload.slot[0]);
      });
}

}  // namespace

QuicksortResult quicksort_run(std::vector<std::int64_t>& data, std::size_t cutoff,
                              const SchedulerConfig& config, KernelMode mode,
                              PlaceMetrics* metrics_out) {
  if (cutoff == 0) throw std::invalid_argument("quicksort: cutoff must be >= 1");
  StrategyRegistry reg;
  QuicksortContext ctx;
  ctx.data = data.data();
  ctx.cutoff = cutoff;
  ctx.mode = mode;
  ctx.type = register_quicksort_strategy(reg);

  Scheduler sched(config, reg);
  const auto start = std::chrono::steady_clock::now();
  sched.run([&] {
    if (!data.empty()) ctx.spawn_range(0, data.size());
  });
  QuicksortResult result;
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (metrics_out) *metrics_out = sched.metrics();
  return result;
}

std::vector<std::int64_t> generate_array(std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> out(len);
  for (auto& x : out) x = static_cast<std::int64_t>(rng());
  return out;
}

bool verify_sorted_permutation(std::vector<std::int64_t> original,
                               const std::vector<std::int64_t>& sorted) {
  if (original.size() != sorted.size()) return false;
  if (!std::is_sorted(sorted.begin(), sorted.end())) return false;
  std::sort(original.begin(), original.end());
  return original == sorted;
}

}  // namespace stratsched::kernels
