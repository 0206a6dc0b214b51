#include "stratsched/machine_tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace stratsched {

namespace {

std::uint64_t product(const std::vector<unsigned>& fanouts) {
  std::uint64_t p = 1;
  for (unsigned f : fanouts) p *= f;
  return p;
}

}  // namespace

MachineTree::MachineTree(std::vector<unsigned> fanouts) : fanouts_(std::move(fanouts)) {
  const std::uint64_t full = product(fanouts_);
  if (full > (std::uint64_t{1} << 20)) throw std::invalid_argument("machine tree too large");
  init(static_cast<PlaceId>(full));
}

MachineTree::MachineTree(std::vector<unsigned> fanouts, PlaceId leaf_count)
    : fanouts_(std::move(fanouts)) {
  init(leaf_count);
}

void MachineTree::init(PlaceId leaf_count) {
  if (fanouts_.empty()) throw std::invalid_argument("machine tree needs at least one level");
  for (unsigned f : fanouts_) {
    if (f == 0) throw std::invalid_argument("machine tree fanout must be positive");
  }
  const std::uint64_t full = product(fanouts_);
  if (leaf_count == 0 || leaf_count > full) {
    throw std::invalid_argument("machine tree leaf count out of range");
  }
  // Trimming may only drop leaves from the end; every prior last-level group
  // must stay complete enough that digit paths remain meaningful.
  leaf_count_ = leaf_count;
  leaves_below_.assign(fanouts_.size(), 1);
  std::uint64_t span = 1;
  for (std::size_t i = fanouts_.size(); i-- > 0;) {
    leaves_below_[i] = span;   // leaves under one child of a level-i node
    span *= fanouts_[i];
  }
}

MachineTree MachineTree::parse(const std::string& text) {
  std::vector<unsigned> fanouts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find('x', pos);
    const std::string part = text.substr(pos, next == std::string::npos ? next : next - pos);
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("bad topology: '" + text + "'");
    }
    unsigned long v = std::stoul(part);
    if (v == 0 || v > 1024) throw std::invalid_argument("bad topology fanout: '" + part + "'");
    fanouts.push_back(static_cast<unsigned>(v));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return MachineTree(std::move(fanouts));
}

MachineTree MachineTree::default_for_threads(unsigned thread_count) {
  if (thread_count == 0) throw std::invalid_argument("thread count must be positive");
  if (thread_count == 1) return MachineTree({1u}, 1);
  const unsigned lower = std::min(thread_count, 4u);
  const unsigned upper = (thread_count + lower - 1) / lower;
  return MachineTree({upper, lower}, thread_count);
}

void MachineTree::check_place(PlaceId p) const {
  if (p >= leaf_count_) throw std::out_of_range("place id out of range");
}

unsigned MachineTree::memory_distance(PlaceId a, PlaceId b) const {
  check_place(a);
  check_place(b);
  // Walk levels top-down; the first level whose digits differ marks the LCA.
  for (std::size_t i = 0; i < fanouts_.size(); ++i) {
    const std::uint64_t da = a / leaves_below_[i] % fanouts_[i];
    const std::uint64_t db = b / leaves_below_[i] % fanouts_[i];
    if (da != db) return static_cast<unsigned>(fanouts_.size() - i);
  }
  return 0;
}

std::vector<PlaceId> MachineTree::victim_order(PlaceId thief, std::mt19937_64& rng) const {
  check_place(thief);
  std::vector<std::vector<PlaceId>> by_distance(depth() + 1);
  for (PlaceId p = 0; p < leaf_count_; ++p) {
    if (p == thief) continue;
    by_distance[memory_distance(thief, p)].push_back(p);
  }
  std::vector<PlaceId> order;
  order.reserve(leaf_count_ - 1);
  for (auto& cls : by_distance) {
    std::shuffle(cls.begin(), cls.end(), rng);
    order.insert(order.end(), cls.begin(), cls.end());
  }
  return order;
}

}  // namespace stratsched
