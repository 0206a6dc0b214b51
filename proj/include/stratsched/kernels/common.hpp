#pragma once

#include <cstdint>
#include <random>

namespace stratsched::kernels {

// How a kernel wires its tasks to the scheduler.
//  kStrategy: the kernel's own strategy types (priorities, weights,
//             conversion, dead-task rules).
//  kLifoFifo: identical task logic, but descriptors use the root
//             LIFO/FIFO strategy with weight 1, no conversion and no
//             dead-task elimination — the classic work-stealing baseline.
enum class KernelMode { kStrategy, kLifoFifo };

// Deterministic helpers on top of the bit-exact mt19937_64 engine. The
// standard distributions are implementation-defined, so problem generators
// use plain modulo reduction instead; the slight bias is irrelevant here and
// the streams are reproducible everywhere.
inline std::uint64_t rand_below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

inline std::int64_t rand_range(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rand_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

}  // namespace stratsched::kernels
