#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stratsched/scheduler.hpp"

namespace stratsched::harness {

// How the benchmark wires its tasks:
//  kStrategy — the kernel's own scheduling strategy.
//  kLifoFifo — identical task bodies under the plain LIFO/FIFO baseline.
//  kOracle   — strategy wiring forced onto a single worker: fully
//              deterministic, used to record golden results.
enum class RunMode { kStrategy, kLifoFifo, kOracle };

const char* mode_name(RunMode mode);
RunMode parse_mode(const std::string& name);  // throws std::invalid_argument

// Union of the per-benchmark knobs; zero/empty means "use the benchmark's
// default" where a default exists.
struct KernelParams {
  std::size_t n = 0;            // problem size (bb/sssp vertices, array length)
  unsigned density_pct = 0;     // edge probability in percent (bb 50, sssp 10)
  std::int64_t weight_max = 0;  // max edge weight (bb 100, sssp 1000)
  unsigned split_k = 0;         // bipartition |A|; 0 keeps n/2
  std::size_t blocks = 0;       // prefix-sum block count (default 64)
  double b0 = 4.1;              // tree branching at the root
  unsigned h_max = 20;          // tree height cap
  unsigned grid = 64;           // mesh grid cells per side
  std::size_t cutoff = 256;     // quicksort sequential cutoff
  std::string mesh_file;        // explicit mesh instance (overrides --grid)
  std::string graph_file;       // explicit graph instance (overrides --n)
};

// The experiment protocol: every (seed, rep) pair is one scheduler run, the
// same seed list is reused across modes so compared runs see identical
// problem instances.
struct RunSpec {
  std::string benchmark;  // bb|prefix|uts|tristrip|sssp|quicksort|composed
  RunMode mode = RunMode::kStrategy;
  unsigned threads = 1;
  unsigned reps = 10;
  std::vector<std::uint64_t> seeds;  // empty -> kDefaultSeeds
  std::vector<unsigned> topology;    // empty -> scheduler default
  KernelParams params;
  std::string csv_path;  // empty -> no file written
  bool pin_threads = false;
};

inline constexpr std::array<std::uint64_t, 10> kDefaultSeeds{1, 2, 3, 4, 5,
                                                             6, 7, 8, 9, 10};

struct RunRecord {
  std::string benchmark;
  std::string mode;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  unsigned rep = 0;
  double wall_ms = 0.0;
  std::optional<double> time_to_optimum_ms;        // bb
  std::optional<std::uint64_t> nodes_expanded;     // bb, uts, composed (tree part)
  std::optional<std::uint64_t> strip_count;        // tristrip
  std::optional<std::uint64_t> second_pass_blocks; // prefix, composed
  PlaceMetrics metrics;
};

// A run whose output failed the kernel's verifier (maps to exit code 2).
struct VerificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Executes reps x seeds scheduler runs, verifying every result against the
// kernel's oracle/verifier; writes the CSV when the spec names a path.
// Throws std::invalid_argument for bad specs and VerificationError when any
// run's output fails verification.
std::vector<RunRecord> run(const RunSpec& spec);

// Fixed CSV schema; one header line, one line per record, empty cells where
// a column does not apply to the benchmark.
extern const char* const kCsvHeader;
void write_csv(std::ostream& out, const std::vector<RunRecord>& records);

// Median/mean of every populated numeric column, grouped by
// (benchmark, mode, threads); groups keep first-appearance order, columns
// keep schema order.
struct SummaryRow {
  std::string benchmark;
  std::string mode;
  unsigned threads = 1;
  std::string column;
  std::size_t count = 0;
  double median = 0.0;
  double mean = 0.0;
};
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);
std::vector<SummaryRow> summarize_csv(std::istream& in);  // throws on malformed input
void print_summary(std::ostream& out, const std::vector<SummaryRow>& rows);

// The call-conversion divisor: STRATSCHED_K from the environment when set to
// a positive integer, otherwise the scheduler default (64).
unsigned effective_conversion_divisor();

// "f1xf2x..." -> {f1, f2, ...}; throws std::invalid_argument on bad syntax.
std::vector<unsigned> parse_topology(const std::string& text);

// "s1,s2,..." -> seed list; throws std::invalid_argument on bad syntax.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace stratsched::harness
