#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace stratsched {

using PlaceId = std::uint32_t;

// Abstract machine model: a balanced tree whose leaves are execution places
// (one per worker thread). Interior levels group places that share a level of
// the memory hierarchy, so the tree distance between two leaves approximates
// how expensive it is for one to touch the other's data.
class MachineTree {
public:
  // Full tree: leaf count is the product of the fanouts.
  explicit MachineTree(std::vector<unsigned> fanouts);

  // Trimmed tree: keeps only the first `leaf_count` leaves of the full tree.
  // The digit paths of the surviving leaves are unchanged, so distances are
  // the same as in the untrimmed tree.
  MachineTree(std::vector<unsigned> fanouts, PlaceId leaf_count);

  // Parses "f1xf2x...xfk", e.g. "2x4" -> two levels with fanouts {2, 4}.
  static MachineTree parse(const std::string& text);

  // Default topology for a thread count: a two-level tree with fanouts
  // [ceil(P/4), min(P, 4)], trimmed to exactly P leaves.
  static MachineTree default_for_threads(unsigned thread_count);

  PlaceId leaf_count() const noexcept { return leaf_count_; }
  unsigned depth() const noexcept { return static_cast<unsigned>(fanouts_.size()); }
  const std::vector<unsigned>& fanouts() const noexcept { return fanouts_; }

  // Tree depth minus the depth of the lowest common ancestor of the two
  // leaves. 0 iff a == b; places under the same last-level node are at 1.
  unsigned memory_distance(PlaceId a, PlaceId b) const;

  // Every place except `thief`, nearest distance class first. Places within
  // one distance class are shuffled with the caller's generator so repeated
  // steal rounds probe them in varying order.
  std::vector<PlaceId> victim_order(PlaceId thief, std::mt19937_64& rng) const;

private:
  std::vector<unsigned> fanouts_;
  // leaves_below_[i]: leaves spanned by one node at level i (product of the
  // fanouts below level i).
  std::vector<std::uint64_t> leaves_below_;
  PlaceId leaf_count_ = 1;

  void init(PlaceId leaf_count);
  void check_place(PlaceId p) const;
};

}  // namespace stratsched
