#include "stratsched/harness.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "stratsched/kernels/bipartition.hpp"
#include "stratsched/kernels/composed.hpp"
#include "stratsched/kernels/prefix_sum.hpp"
#include "stratsched/kernels/quicksort.hpp"
#include "stratsched/kernels/sssp.hpp"
#include "stratsched/kernels/tristrip.hpp"
#include "stratsched/kernels/uts.hpp"

namespace stratsched::harness {

namespace k = stratsched::kernels;

const char* mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::kStrategy: return "strategy";
    case RunMode::kLifoFifo: return "lifo_fifo";
    case RunMode::kOracle: return "oracle";
  }
  return "?";
}

RunMode parse_mode(const std::string& name) {
  if (name == "strategy") return RunMode::kStrategy;
  if (name == "lifo_fifo") return RunMode::kLifoFifo;
  if (name == "oracle") return RunMode::kOracle;
  throw std::invalid_argument("unknown mode '" + name +
                              "' (expected strategy, lifo_fifo, or oracle)");
}

unsigned effective_conversion_divisor() {
  if (const char* env = std::getenv("STRATSCHED_K")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    throw std::invalid_argument("STRATSCHED_K must be a positive integer");
  }
  return SchedulerConfig{}.call_conversion_divisor;
}

std::vector<unsigned> parse_topology(const std::string& text) {
  std::vector<unsigned> fanouts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find('x', pos);
    const std::string part = text.substr(pos, next == std::string::npos ? next : next - pos);
    char* end = nullptr;
    const unsigned long v = std::strtoul(part.c_str(), &end, 10);
    if (part.empty() || end != part.c_str() + part.size() || v == 0) {
      throw std::invalid_argument("bad topology '" + text + "' (expected e.g. \"2x4\")");
    }
    fanouts.push_back(static_cast<unsigned>(v));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return fanouts;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find(',', pos);
    const std::string part = text.substr(pos, next == std::string::npos ? next : next - pos);
    char* end = nullptr;
    const unsigned long long v = std::strtoull(part.c_str(), &end, 10);
    if (part.empty() || end != part.c_str() + part.size()) {
      throw std::invalid_argument("bad seed list '" + text + "' (expected e.g. \"1,2,3\")");
    }
    seeds.push_back(v);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return seeds;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::int64_t> prefix_input(std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> v(len);
  // Small magnitudes keep the running total far from overflow at any length.
  for (auto& x : v) x = static_cast<std::int64_t>(rng() % 2001) - 1000;
  return v;
}

std::size_t block_size_for(std::size_t len, std::size_t blocks) {
  if (blocks == 0) blocks = 64;
  if (len == 0) return 1;
  return (len + blocks - 1) / blocks;
}

void fail_verify(const RunRecord& r, const std::string& what) {
  std::ostringstream msg;
  msg << r.benchmark << " verification failed (mode=" << r.mode << ", threads=" << r.threads
      << ", seed=" << r.seed << ", rep=" << r.rep << "): " << what;
  throw VerificationError(msg.str());
}

// Per-run() caches so reps and modes reuse instances and oracle solutions.
struct Caches {
  std::map<std::uint64_t, k::BipartitionProblem> bb;
  std::map<std::uint64_t, std::vector<std::int64_t>> arrays;  // prefix/quicksort inputs
  std::map<std::uint64_t, std::vector<std::int64_t>> expected;  // their oracle outputs
  std::map<std::uint64_t, k::Graph> graphs;
  std::map<std::uint64_t, std::vector<std::int64_t>> dists;
  std::map<std::string, std::uint64_t> uts_golden;  // params fingerprint -> count
  bool mesh_ready = false;
  k::TriangleMesh mesh;
};

std::uint64_t uts_golden_count(Caches& c, const k::UTSParams& p) {
  std::ostringstream key;
  key << p.root_state << '/' << p.b0 << '/' << p.h_max << '/' << p.m_max;
  const auto it = c.uts_golden.find(key.str());
  if (it != c.uts_golden.end()) return it->second;
  const std::uint64_t count = k::uts_count_sequential(p);
  c.uts_golden.emplace(key.str(), count);
  return count;
}

}  // namespace

const char* const kCsvHeader =
    "benchmark,mode,threads,seed,rep,wall_ms,time_to_optimum_ms,nodes_expanded,"
    "strip_count,second_pass_blocks,pushes,pops,steals,steal_attempts,"
    "call_conversions,dead_removed";

std::vector<RunRecord> run(const RunSpec& spec) {
  const std::vector<std::uint64_t> seeds =
      spec.seeds.empty() ? std::vector<std::uint64_t>(kDefaultSeeds.begin(), kDefaultSeeds.end())
                         : spec.seeds;
  if (spec.reps == 0) throw std::invalid_argument("reps must be >= 1");
  if (spec.threads == 0) throw std::invalid_argument("threads must be >= 1");

  const KernelParams& p = spec.params;
  const k::KernelMode wire =
      spec.mode == RunMode::kLifoFifo ? k::KernelMode::kLifoFifo : k::KernelMode::kStrategy;
  const unsigned divisor = effective_conversion_divisor();

  Caches caches;
  std::vector<RunRecord> records;
  records.reserve(seeds.size() * spec.reps);

  for (const std::uint64_t seed : seeds) {
    for (unsigned rep = 0; rep < spec.reps; ++rep) {
      SchedulerConfig cfg;
      cfg.thread_count = spec.mode == RunMode::kOracle ? 1 : spec.threads;
      cfg.topology = spec.mode == RunMode::kOracle ? std::vector<unsigned>{} : spec.topology;
      cfg.call_conversion_divisor = divisor;
      cfg.rng_seed = seed;
      cfg.pin_threads = spec.pin_threads;

      RunRecord rec;
      rec.benchmark = spec.benchmark;
      rec.mode = mode_name(spec.mode);
      rec.threads = cfg.thread_count;
      rec.seed = seed;
      rec.rep = rep;

      if (spec.benchmark == "bb") {
        auto it = caches.bb.find(seed);
        if (it == caches.bb.end()) {
          auto prob = k::generate_bipartition(p.n ? static_cast<unsigned>(p.n) : 22,
                                              p.density_pct ? p.density_pct : 50,
                                              p.weight_max ? p.weight_max : 100, seed);
          if (p.split_k) {
            if (p.split_k > prob.n) throw std::invalid_argument("--k exceeds --n");
            prob.k1 = p.split_k;
            prob.k2 = prob.n - prob.k1;
          }
          it = caches.bb.emplace(seed, std::move(prob)).first;
        }
        const auto r = k::bb_solve(it->second, cfg, wire, &rec.metrics);
        if (!r.valid) fail_verify(rec, "partition invalid or cut inconsistent");
        rec.wall_ms = r.wall_ms;
        rec.time_to_optimum_ms = r.time_to_optimum_ms;
        rec.nodes_expanded = r.nodes_expanded;
      } else if (spec.benchmark == "prefix") {
        const std::size_t len = p.n ? p.n : 1'000'000;
        auto it = caches.arrays.find(seed);
        if (it == caches.arrays.end()) {
          it = caches.arrays.emplace(seed, prefix_input(len, seed)).first;
          caches.expected.emplace(seed, k::sequential_prefix(it->second));
        }
        std::vector<std::int64_t> data = it->second;
        const auto r = k::prefix_sum(data, block_size_for(len, p.blocks), cfg, wire, &rec.metrics);
        if (data != caches.expected.at(seed)) fail_verify(rec, "scan differs from sequential");
        rec.wall_ms = r.wall_ms;
        rec.second_pass_blocks = r.second_pass_blocks;
      } else if (spec.benchmark == "uts") {
        k::UTSParams up;
        up.b0 = p.b0;
        up.h_max = p.h_max;
        const std::uint64_t want = uts_golden_count(caches, up);
        const auto r = k::uts_run(up, cfg, wire, &rec.metrics);
        if (r.node_count != want) {
          fail_verify(rec, "node count " + std::to_string(r.node_count) + " != golden " +
                               std::to_string(want));
        }
        rec.wall_ms = r.wall_ms;
        rec.nodes_expanded = r.node_count;
      } else if (spec.benchmark == "tristrip") {
        if (!caches.mesh_ready) {
          caches.mesh = p.mesh_file.empty() ? k::grid_mesh(p.grid ? p.grid : 64)
                                            : k::parse_mesh_text(read_file(p.mesh_file));
          caches.mesh_ready = true;
        }
        const auto r = k::tristrip_run(caches.mesh, cfg, wire, seed, &rec.metrics);
        if (!k::verify_strips(caches.mesh, r.strips)) {
          fail_verify(rec, "strips are not a disjoint adjacency-path cover");
        }
        rec.wall_ms = r.wall_ms;
        rec.strip_count = r.strips.size();
      } else if (spec.benchmark == "sssp") {
        auto it = caches.graphs.find(seed);
        if (it == caches.graphs.end()) {
          k::Graph g = p.graph_file.empty()
                           ? k::generate_graph(p.n ? p.n : 2000, p.density_pct ? p.density_pct : 10,
                                               p.weight_max ? p.weight_max : 1000, seed)
                           : k::parse_graph_text(read_file(p.graph_file));
          it = caches.graphs.emplace(seed, std::move(g)).first;
          caches.dists.emplace(seed, k::dijkstra(it->second, 0));
        }
        const auto r = k::sssp_run(it->second, 0, cfg, wire, &rec.metrics);
        if (r.dist != caches.dists.at(seed)) fail_verify(rec, "distances differ from reference");
        rec.wall_ms = r.wall_ms;
      } else if (spec.benchmark == "quicksort") {
        const std::size_t len = p.n ? p.n : 1'000'000;
        auto it = caches.arrays.find(seed);
        if (it == caches.arrays.end()) {
          it = caches.arrays.emplace(seed, k::generate_array(len, seed)).first;
          auto sorted = it->second;
          std::sort(sorted.begin(), sorted.end());
          caches.expected.emplace(seed, std::move(sorted));
        }
        std::vector<std::int64_t> data = it->second;
        const auto r = k::quicksort_run(data, p.cutoff ? p.cutoff : 256, cfg, wire, &rec.metrics);
        if (data != caches.expected.at(seed)) fail_verify(rec, "output differs from reference sort");
        rec.wall_ms = r.wall_ms;
      } else if (spec.benchmark == "composed") {
        const std::size_t len = p.n ? p.n : 1'000'000;
        k::UTSParams up;
        up.b0 = p.b0;
        up.h_max = p.h_max;
        const std::uint64_t want_nodes = uts_golden_count(caches, up);
        auto it = caches.arrays.find(seed);
        if (it == caches.arrays.end()) {
          it = caches.arrays.emplace(seed, prefix_input(len, seed)).first;
          caches.expected.emplace(seed, k::sequential_prefix(it->second));
        }
        std::vector<std::int64_t> data = it->second;
        const auto r = k::composed_run(data, block_size_for(len, p.blocks), up, cfg, wire,
                                       &rec.metrics);
        if (data != caches.expected.at(seed)) fail_verify(rec, "scan differs from sequential");
        if (r.uts_node_count != want_nodes) fail_verify(rec, "tree count differs from golden");
        rec.wall_ms = r.wall_ms;
        rec.nodes_expanded = r.uts_node_count;
        rec.second_pass_blocks = r.second_pass_blocks;
      } else {
        throw std::invalid_argument(
            "unknown benchmark '" + spec.benchmark +
            "' (expected bb, prefix, uts, tristrip, sssp, quicksort, or composed)");
      }

      records.push_back(std::move(rec));
    }
  }

  if (!spec.csv_path.empty()) {
    std::ofstream out(spec.csv_path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write CSV file: " + spec.csv_path);
    write_csv(out, records);
  }
  return records;
}

namespace {

void put_ms(std::ostream& out, double v) {
  out << std::fixed << std::setprecision(3) << v;
  out.unsetf(std::ios::floatfield);
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << kCsvHeader << '\n';
  for (const RunRecord& r : records) {
    out << r.benchmark << ',' << r.mode << ',' << r.threads << ',' << r.seed << ',' << r.rep
        << ',';
    put_ms(out, r.wall_ms);
    out << ',';
    if (r.time_to_optimum_ms) put_ms(out, *r.time_to_optimum_ms);
    out << ',';
    if (r.nodes_expanded) out << *r.nodes_expanded;
    out << ',';
    if (r.strip_count) out << *r.strip_count;
    out << ',';
    if (r.second_pass_blocks) out << *r.second_pass_blocks;
    out << ',' << r.metrics.pushes << ',' << r.metrics.pops << ',' << r.metrics.steals << ','
        << r.metrics.steal_attempts << ',' << r.metrics.call_conversions << ','
        << r.metrics.dead_removed << '\n';
  }
}

namespace {

constexpr std::size_t kNumericColumns = 11;  // wall_ms .. dead_removed
const char* const kNumericNames[kNumericColumns] = {
    "wall_ms",       "time_to_optimum_ms", "nodes_expanded",   "strip_count",
    "second_pass_blocks", "pushes",        "pops",             "steals",
    "steal_attempts", "call_conversions",  "dead_removed"};

struct GroupKey {
  std::string benchmark;
  std::string mode;
  unsigned threads = 1;
  bool operator==(const GroupKey&) const = default;
};

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::vector<SummaryRow> summarize_table(
    const std::vector<std::pair<GroupKey, std::array<std::vector<double>, kNumericColumns>>>&
        groups) {
  std::vector<SummaryRow> rows;
  for (const auto& [key, columns] : groups) {
    for (std::size_t c = 0; c < kNumericColumns; ++c) {
      const std::vector<double>& values = columns[c];
      if (values.empty()) continue;
      SummaryRow row;
      row.benchmark = key.benchmark;
      row.mode = key.mode;
      row.threads = key.threads;
      row.column = kNumericNames[c];
      row.count = values.size();
      row.median = median_of(values);
      double sum = 0;
      for (double v : values) sum += v;
      row.mean = sum / static_cast<double>(values.size());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

template <class Groups>
typename Groups::value_type::second_type& group_slot(Groups& groups, GroupKey key) {
  for (auto& [k2, columns] : groups) {
    if (k2 == key) return columns;
  }
  groups.emplace_back(std::move(key), typename Groups::value_type::second_type{});
  return groups.back().second;
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  std::vector<std::pair<GroupKey, std::array<std::vector<double>, kNumericColumns>>> groups;
  for (const RunRecord& r : records) {
    auto& columns = group_slot(groups, GroupKey{r.benchmark, r.mode, r.threads});
    columns[0].push_back(r.wall_ms);
    if (r.time_to_optimum_ms) columns[1].push_back(*r.time_to_optimum_ms);
    if (r.nodes_expanded) columns[2].push_back(static_cast<double>(*r.nodes_expanded));
    if (r.strip_count) columns[3].push_back(static_cast<double>(*r.strip_count));
    if (r.second_pass_blocks) columns[4].push_back(static_cast<double>(*r.second_pass_blocks));
    columns[5].push_back(static_cast<double>(r.metrics.pushes));
    columns[6].push_back(static_cast<double>(r.metrics.pops));
    columns[7].push_back(static_cast<double>(r.metrics.steals));
    columns[8].push_back(static_cast<double>(r.metrics.steal_attempts));
    columns[9].push_back(static_cast<double>(r.metrics.call_conversions));
    columns[10].push_back(static_cast<double>(r.metrics.dead_removed));
  }
  return summarize_table(groups);
}

std::vector<SummaryRow> summarize_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::invalid_argument("malformed CSV: missing or unexpected header");
  }
  std::vector<std::pair<GroupKey, std::array<std::vector<double>, kNumericColumns>>> groups;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t next = line.find(',', pos);
      cells.push_back(line.substr(pos, next == std::string::npos ? next : next - pos));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (cells.size() != 5 + kNumericColumns) {
      throw std::invalid_argument("malformed CSV: wrong cell count on line " +
                                  std::to_string(line_no));
    }
    GroupKey key;
    key.benchmark = cells[0];
    key.mode = cells[1];
    try {
      key.threads = static_cast<unsigned>(std::stoul(cells[2]));
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed CSV: bad thread count on line " +
                                  std::to_string(line_no));
    }
    auto& columns = group_slot(groups, std::move(key));
    for (std::size_t c = 0; c < kNumericColumns; ++c) {
      const std::string& cell = cells[5 + c];
      if (cell.empty()) continue;
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        columns[c].push_back(v);
      } catch (const std::exception&) {
        throw std::invalid_argument("malformed CSV: bad number '" + cell + "' on line " +
                                    std::to_string(line_no));
      }
    }
  }
  return summarize_table(groups);
}

void print_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << std::left << std::setw(12) << "benchmark" << std::setw(11) << "mode" << std::right
      << std::setw(8) << "threads" << std::left << "  " << std::setw(20) << "column" << std::right
      << std::setw(7) << "count" << std::setw(16) << "median" << std::setw(16) << "mean" << '\n';
  for (const SummaryRow& r : rows) {
    out << std::left << std::setw(12) << r.benchmark << std::setw(11) << r.mode << std::right
        << std::setw(8) << r.threads << std::left << "  " << std::setw(20) << r.column
        << std::right << std::setw(7) << r.count << std::setw(16) << std::fixed
        << std::setprecision(3) << r.median << std::setw(16) << r.mean << '\n';
    out.unsetf(std::ios::floatfield);
  }
}

}  // namespace stratsched::harness
