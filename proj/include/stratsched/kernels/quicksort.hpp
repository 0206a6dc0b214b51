#pragma once

#include <cstdint>
#include <vector>

#include "stratsched/kernels/common.hpp"
#include "stratsched/scheduler.hpp"

namespace stratsched::kernels {

struct QuicksortResult {
  double wall_ms = 0.0;
};

// Parallel quicksort: each partition spawns tasks for both halves; ranges at
// or below `cutoff` are sorted inline. Task weight approximates remaining
// work as n' * ceil(log2 n') with n' = ceil(len / cutoff); locally the
// shortest range runs first, thieves take the longest.
QuicksortResult quicksort_run(std::vector<std::int64_t>& data, std::size_t cutoff,
                              const SchedulerConfig& config, KernelMode mode,
                              PlaceMetrics* metrics_out = nullptr);

// Random array for benchmarks/tests (full 64-bit value range).
std::vector<std::int64_t> generate_array(std::size_t len, std::uint64_t seed);

// True when `sorted` is an ascending permutation of `original`.
bool verify_sorted_permutation(std::vector<std::int64_t> original,
                               const std::vector<std::int64_t>& sorted);

}  // namespace stratsched::kernels
