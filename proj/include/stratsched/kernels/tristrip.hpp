#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stratsched/kernels/common.hpp"
#include "stratsched/scheduler.hpp"

namespace stratsched::kernels {

// Triangle mesh with adjacency over shared edges: node = triangle, edge =
// two triangles sharing a vertex pair, so every triangle has at most three
// neighbors.
struct TriangleMesh {
  std::vector<std::array<std::uint32_t, 3>> triangles;  // vertex ids
  std::vector<std::array<std::int32_t, 3>> neighbors;   // -1 where absent

  std::size_t triangle_count() const { return triangles.size(); }
};

// Builds adjacency from raw triangles; throws if an edge is shared by more
// than two triangles.
TriangleMesh build_mesh(std::vector<std::array<std::uint32_t, 3>> triangles);

// g x g cell grid, two triangles per cell, fixed diagonal.
TriangleMesh grid_mesh(unsigned g);

// g x g cell grid with a seeded random diagonal per cell (planar).
TriangleMesh planar_mesh(unsigned g, std::uint64_t seed);

// Text format: first line is the triangle count, then one "v0 v1 v2" line
// per triangle.
TriangleMesh parse_mesh_text(const std::string& text);

struct TriStripResult {
  std::vector<std::vector<std::uint32_t>> strips;  // triangle indices
  double wall_ms = 0.0;
};

// Decomposes the mesh into triangle strips (paths in the adjacency graph).
// Start tasks grow one strip from a seed triangle, greedily extending both
// ends toward neighbors with the fewest unclaimed neighbors; Spawn tasks
// split the triangle range and emit Start tasks for unclaimed triangles.
// Strategy mode runs Start tasks first locally while thieves prefer Spawn
// tasks, and drops Start tasks whose triangle was already claimed.
TriStripResult tristrip_run(const TriangleMesh& mesh, const SchedulerConfig& config,
                            KernelMode mode, std::uint64_t seed,
                            PlaceMetrics* metrics_out = nullptr);

// True when the strips are disjoint adjacency paths covering every triangle.
bool verify_strips(const TriangleMesh& mesh,
                   const std::vector<std::vector<std::uint32_t>>& strips);

}  // namespace stratsched::kernels
