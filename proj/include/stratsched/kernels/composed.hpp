#pragma once

#include <cstdint>
#include <vector>

#include "stratsched/kernels/prefix_sum.hpp"
#include "stratsched/kernels/uts.hpp"

namespace stratsched::kernels {

struct ComposedResult {
  std::uint64_t second_pass_blocks = 0;
  std::uint64_t uts_node_count = 0;
  double wall_ms = 0.0;
};

// Prefix sum and UTS launched together under one scheduler, both task
// families in the same root finish scope. Their strategy types coexist in
// one registry, so the storage's cross-type grouping is exercised for real.
ComposedResult composed_run(std::vector<std::int64_t>& prefix_data, std::size_t block_size,
                            const UTSParams& uts_params, const SchedulerConfig& config,
                            KernelMode mode, PlaceMetrics* metrics_out = nullptr);

}  // namespace stratsched::kernels
