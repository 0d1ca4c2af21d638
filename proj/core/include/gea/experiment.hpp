#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gea/batch.hpp"
#include "gea/evolution.hpp"
#include "gea/network.hpp"
#include "gea/oracle.hpp"
#include "gea/zeroproxy.hpp"

namespace gea {

enum class Method { gea, rea, rs };
std::string_view to_string(Method m);
Method parse_method(std::string_view s);

// Which scorer guides GEA: the Jacobian-covariance network proxy, the
// benchmark's precomputed synthetic proxy ("table"), or table when the
// benchmark carries one and network otherwise ("auto").
enum class ScorerKind { automatic, network, table };

struct BenchmarkSource {
  std::optional<std::string> path;  // tabular file; synthetic when unset
  SyntheticSpec synthetic;
};

struct BatchSource {
  std::optional<std::string> raw_path;  // CIFAR-10 binary; synthetic when unset
  std::size_t raw_count = 32;
  SyntheticBatchSpec synthetic;
};

struct SweepAxis {
  std::string parameter;  // a SearchConfig field name, or "method"
  std::vector<std::string> values;
};

struct ExperimentConfig {
  Method method = Method::gea;
  SearchConfig search;
  BenchmarkSource benchmark;
  BatchSource batch;
  SkeletonConfig skeleton;
  ProxyParams proxy;
  ScorerKind scorer = ScorerKind::automatic;
  std::size_t num_runs = 25;
  std::vector<SweepAxis> sweep;
  std::string output = "results";
  std::size_t threads = 1;  // concurrent runs
  // Transfer search: every GEA/REA run starts from this checkpoint.
  std::optional<std::string> init_population;
  // Write each run's final population as <output>/checkpoint_<label>_<run>.json.
  bool save_checkpoints = false;

  void validate() const;
};

// JSON object mirroring the field names above. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string dump_experiment_config(const ExperimentConfig& cfg);

// Applies one sweep assignment ("removal_mode" = "highest") to a config.
void apply_parameter(ExperimentConfig& cfg, std::string_view parameter, std::string_view value);

struct SweepPoint {
  std::string label;
  ExperimentConfig config;
};

// Cartesian product of the sweep axes; a single point labeled with the
// method name when there is no sweep.
std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg);

struct RunResult {
  std::string label;
  std::size_t run_id = 0;
  Trajectory trajectory;
  double regret = 0.0;
};

struct SummaryRow {
  std::string label;
  std::size_t num_runs = 0;
  double mean_val_acc = 0.0;
  double std_val_acc = 0.0;
  double mean_test_acc = 0.0;
  double std_test_acc = 0.0;
  double mean_search_time_s = 0.0;
  double mean_regret = 0.0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct ExperimentResult {
  std::vector<RunResult> runs;  // grouped by sweep point, then run_id
  std::vector<SummaryRow> rows;
  ArchEncoding best_arch;
  FitnessRecord best_record;
};

// Seed of run r is Rng(search.seed).split(r), shared across sweep points so
// comparisons are paired. The batch and benchmark are built once, before any
// run starts.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Variant with a caller-supplied benchmark (tests, repeated sweeps).
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Benchmark& bench);

Benchmark resolve_benchmark(const BenchmarkSource& src);
Batch resolve_batch(const BatchSource& src, std::vector<std::string>* warnings = nullptr);

SummaryRow summarize(std::string label, const std::vector<const RunResult*>& runs);

struct EmittedFiles {
  std::filesystem::path curves_csv;
  std::filesystem::path summary_json;
};

// Writes <dir>/curves.csv (label, run_id, cycle, best_so_far,
// simulated_time_s) and <dir>/summary.json (rows, per-run finals, config
// echo, tool version).
EmittedFiles emit_results(const ExperimentResult& result, const ExperimentConfig& cfg,
                          const std::filesystem::path& dir);

std::string curves_csv(const ExperimentResult& result);
std::string summary_json(const ExperimentResult& result, const ExperimentConfig& cfg);

struct RunFinal {
  std::string label;
  std::size_t run_id = 0;
  std::string arch;
  double val_acc = 0.0;
  double test_acc = 0.0;
  double regret = 0.0;
  double simulated_time_s = 0.0;
};

struct LoadedSummary {
  std::vector<SummaryRow> rows;
  std::vector<RunFinal> runs;
};

LoadedSummary load_summary(const std::filesystem::path& path);
LoadedSummary parse_summary(const std::string& json_text);

std::string_view tool_version();

}  // namespace gea
