#include "stratsched/kernels/composed.hpp"

#include <chrono>

namespace stratsched::kernels {

ComposedResult composed_run(std::vector<std::int64_t>& prefix_data, std::size_t block_size,
                            const UTSParams& uts_params, const SchedulerConfig& config,
                            KernelMode mode, PlaceMetrics* metrics_out) {
  StrategyRegistry reg;
  PrefixSumKernel prefix(prefix_data, block_size);
  UTSKernel uts(uts_params);
  prefix.register_with(reg);
  uts.register_with(reg);

  Scheduler sched(config, reg);
  const auto start = std::chrono::steady_clock::now();
  sched.run([&] {
    prefix.launch(mode);
    uts.launch(mode);
  });
  ComposedResult result;
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  result.second_pass_blocks = prefix.second_pass_blocks();
  result.uts_node_count = uts.node_count();
  if (metrics_out) *metrics_out = sched.metrics();
  return result;
}

}  // namespace stratsched::kernels
