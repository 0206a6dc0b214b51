// Benchmark harness CLI: runs one benchmark under a chosen scheduling mode,
// sweeps (seed, rep) pairs, verifies every result, and emits CSV metrics.
// Exit codes: 0 success, 1 usage/spec errors, 2 verification failure.
#include <CLI11.hpp>

#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "stratsched/harness.hpp"

int main(int argc, char** argv) {
  using namespace stratsched::harness;

  CLI::App app{
      "Task-parallel benchmark harness: work-stealing scheduler with per-task "
      "scheduling strategies vs. the plain LIFO/FIFO baseline"};

  std::string benchmark;
  std::string mode_text = "strategy";
  unsigned threads = 1;
  unsigned reps = 10;
  std::string seeds_text;
  std::string topology_text;
  std::string csv_path;
  std::string summarize_path;
  bool pin = false;
  KernelParams params;

  app.add_option("--benchmark", benchmark,
                 "Benchmark: bb, prefix, uts, tristrip, sssp, quicksort, composed");
  app.add_option("--mode", mode_text, "Scheduling mode: strategy, lifo_fifo, oracle")
      ->capture_default_str();
  app.add_option("--threads", threads, "Worker count (oracle mode forces 1)")
      ->capture_default_str();
  app.add_option("--reps", reps, "Repetitions per seed")->capture_default_str();
  app.add_option("--seeds", seeds_text,
                 "Comma-separated seed list, e.g. \"1,2,3\" (default: 1..10)");
  app.add_option("--topology", topology_text,
                 "Machine-tree fanouts as \"f1xf2\", e.g. \"2x4\" (leaves = threads)");
  app.add_option("--csv", csv_path, "Write one CSV row per run to this path");
  app.add_option("--summarize", summarize_path,
                 "Summarize an existing CSV (medians/means) instead of running");
  app.add_flag("--pin", pin, "Pin workers to CPU cores");

  app.add_option("--n", params.n,
                 "Problem size: vertices (bb 22, sssp 2000) or array length (10^6)");
  app.add_option("--density", params.density_pct,
                 "Edge probability in percent (bb 50, sssp 10)");
  app.add_option("--weight-max", params.weight_max, "Maximum edge weight (bb 100, sssp 1000)");
  app.add_option("--k", params.split_k, "Bipartition size of set A (default n/2)");
  app.add_option("--blocks", params.blocks, "Prefix-sum block count (default 64)");
  app.add_option("--b0", params.b0, "Tree branching factor at the root")->capture_default_str();
  app.add_option("--hmax", params.h_max, "Tree height cap")->capture_default_str();
  app.add_option("--grid", params.grid, "Mesh grid cells per side")->capture_default_str();
  app.add_option("--cutoff", params.cutoff, "Quicksort sequential cutoff")
      ->capture_default_str();
  app.add_option("--mesh", params.mesh_file, "Mesh file (count line, then \"v0 v1 v2\" lines)");
  app.add_option("--graph", params.graph_file,
                 "Graph file (\"n m\" line, then \"from to weight\" lines)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (!summarize_path.empty()) {
      std::ifstream in(summarize_path, std::ios::binary);
      if (!in) throw std::invalid_argument("cannot open CSV file: " + summarize_path);
      print_summary(std::cout, summarize_csv(in));
      return 0;
    }
    if (benchmark.empty()) {
      std::cerr << "--benchmark is required (or use --summarize)\n\n" << app.help();
      return 1;
    }

    RunSpec spec;
    spec.benchmark = benchmark;
    spec.mode = parse_mode(mode_text);
    spec.threads = threads;
    spec.reps = reps;
    if (!seeds_text.empty()) spec.seeds = parse_seed_list(seeds_text);
    if (!topology_text.empty()) spec.topology = parse_topology(topology_text);
    spec.params = params;
    spec.csv_path = csv_path;
    spec.pin_threads = pin;

    const auto records = run(spec);
    print_summary(std::cout, summarize(records));
    if (!csv_path.empty()) {
      std::cout << records.size() << " rows written to " << csv_path << '\n';
    }
    return 0;
  } catch (const VerificationError& e) {
    std::cerr << "verification failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
