#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "stratsched/kernels/common.hpp"
#include "stratsched/scheduler.hpp"

namespace stratsched::kernels {

inline constexpr std::int64_t kUnreachable = std::numeric_limits<std::int64_t>::max();

// Directed weighted graph in compressed adjacency form.
struct Graph {
  std::vector<std::size_t> offsets;  // n + 1 entries
  std::vector<std::uint32_t> to;
  std::vector<std::int64_t> weight;  // non-negative

  std::size_t node_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

// Random undirected graph (each edge stored in both directions): edge
// probability density_pct/100, weights uniform in [1, weight_max].
Graph generate_graph(std::size_t n, unsigned density_pct, std::int64_t weight_max,
                     std::uint64_t seed);

// Text format: first line "n m", then m lines "from to weight".
Graph parse_graph_text(const std::string& text);

struct SSSPResult {
  std::vector<std::int64_t> dist;  // kUnreachable where no path exists
  double wall_ms = 0.0;
};

// Single-source shortest paths where the scheduler plays the priority queue:
// each successful relaxation spawns a task for the relaxed node, locally
// ordered by tentative distance; a task whose node has since been improved
// past its recorded distance is dead.
SSSPResult sssp_run(const Graph& g, std::uint32_t source, const SchedulerConfig& config,
                    KernelMode mode, PlaceMetrics* metrics_out = nullptr);

// Testing oracle.
std::vector<std::int64_t> dijkstra(const Graph& g, std::uint32_t source);

}  // namespace stratsched::kernels
