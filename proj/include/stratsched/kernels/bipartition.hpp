#pragma once

#include <cstdint>
#include <vector>

#include "stratsched/kernels/common.hpp"
#include "stratsched/scheduler.hpp"

namespace stratsched::kernels {

// Undirected weighted graph whose vertices are to be split into two sets of
// sizes (k1, k2), k1 + k2 = n, minimizing the total weight of cut edges.
// Vertex sets are represented as 32-bit masks, so n <= 32.
struct BipartitionProblem {
  unsigned n = 0;
  unsigned k1 = 0;  // target size of set A (default floor(n / 2))
  unsigned k2 = 0;
  std::vector<std::int64_t> weights;  // n*n, symmetric, zero diagonal

  std::int64_t w(unsigned i, unsigned j) const { return weights[i * n + j]; }
};

inline constexpr unsigned kBipartitionMaxVertices = 32;

// Random instance: each edge present with probability density_pct/100,
// weights uniform in [1, weight_max].
BipartitionProblem generate_bipartition(unsigned n, unsigned density_pct,
                                        std::int64_t weight_max, std::uint64_t seed);

// Exact cut weight of the full assignment mask_a (complement = set B).
std::int64_t bipartition_cut(const BipartitionProblem& p, std::uint32_t mask_a);

// Admissible lower bound of the partial assignment: the cut among assigned
// vertices plus, per free vertex, the smaller of its edge weights into the
// two assigned sets (or the only possible side once a set is full).
std::int64_t bb_lower_bound(const BipartitionProblem& p, std::uint32_t mask_a,
                            std::uint32_t mask_b);

// Ordering heuristic >= the lower bound: adds each undecided vertex's mean
// assignment cost minus its best case.
std::int64_t bb_estimate(const BipartitionProblem& p, std::uint32_t mask_a, std::uint32_t mask_b);

// Estimated remaining search depth: how many average edge-weight
// contributions fit between the bound and the incumbent.
unsigned bb_estimated_depth(std::int64_t upper_bound, std::int64_t lower_bound,
                            std::int64_t avg_node_contribution, unsigned free_count);

struct BipartitionResult {
  std::int64_t best_cut = 0;
  std::uint32_t best_mask_a = 0;
  std::uint64_t nodes_expanded = 0;  // task bodies that performed a split
  double time_to_optimum_ms = 0.0;   // when the final incumbent was recorded
  double wall_ms = 0.0;              // scheduler run() duration
  bool valid = false;                // partition well-formed and cut consistent
};

// Parallel branch-and-bound solve under the given scheduler configuration.
BipartitionResult bb_solve(const BipartitionProblem& p, const SchedulerConfig& config,
                           KernelMode mode, PlaceMetrics* metrics_out = nullptr);

// Exhaustive optimum for small n (testing oracle).
std::int64_t brute_force_bipartition(const BipartitionProblem& p);

}  // namespace stratsched::kernels
