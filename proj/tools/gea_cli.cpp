// gea: guided evolutionary architecture search over the 4-node cell space.
//
//   gea search  --method gea --cycles 200 --runs 25 --out results/
//   gea ablate  --sweep removal_mode=oldest,highest,lowest --out ablation/
//   gea bench gen --out bench.json --seed 7 --proxy-tau 0.6
//   gea score '|nor_conv_3x3~0|+|...|' --seed 3
//   gea stats ttest --a a/summary.json --b b/summary.json
//   gea stats tau --benchmark bench.json

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gea/batch.hpp"
#include "gea/cellspace.hpp"
#include "gea/error.hpp"
#include "gea/experiment.hpp"
#include "gea/oracle.hpp"
#include "gea/stats.hpp"
#include "gea/zeroproxy.hpp"

namespace {

using nlohmann::json;

struct SearchFlags {
  std::string config;
  std::string method;
  std::size_t pop_size = 0;
  std::size_t tournament = 0;
  std::size_t cycles = 0;
  std::size_t gen_size = 0;
  std::uint64_t seed = 0;
  std::size_t runs = 0;
  std::string benchmark;
  std::string batch;
  std::string out;
  std::size_t threads = 0;
  std::string scorer;
  std::string removal_mode;
  std::string parent_mode;
  std::string init_from;
  bool save_checkpoints = false;
  std::vector<std::string> sweeps;
};

void add_search_flags(CLI::App* app, SearchFlags& f) {
  app->add_option("--config", f.config, "Experiment config file (JSON)");
  app->add_option("--method", f.method, "gea | rea | rs");
  app->add_option("--pop-size", f.pop_size, "Population size P");
  app->add_option("--tournament", f.tournament, "Tournament size S");
  app->add_option("--cycles", f.cycles, "Trained-architecture budget C");
  app->add_option("--gen-size", f.gen_size, "Children scored per cycle");
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--runs", f.runs, "Number of runs per configuration");
  app->add_option("--benchmark", f.benchmark, "Tabular benchmark file, or 'synthetic'");
  app->add_option("--batch", f.batch, "CIFAR-10 binary batch file, or 'synthetic'");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--threads", f.threads, "Concurrent runs");
  app->add_option("--scorer", f.scorer, "auto | network | table");
  app->add_option("--removal-mode", f.removal_mode, "oldest | highest | lowest");
  app->add_option("--parent-mode", f.parent_mode, "tournament | highest | lowest");
  app->add_option("--init-from", f.init_from, "Checkpoint to start every run from (transfer search)");
  app->add_flag("--save-checkpoints", f.save_checkpoints, "Write each run's final population");
}

// Flags > config file > defaults.
gea::ExperimentConfig resolve_config(const CLI::App* app, const SearchFlags& f) {
  gea::ExperimentConfig cfg;
  if (!f.config.empty()) cfg = gea::load_experiment_config(f.config);
  auto given = [app](const char* name) { return app->count(name) > 0; };
  if (given("--method")) cfg.method = gea::parse_method(f.method);
  if (given("--pop-size")) cfg.search.pop_size = f.pop_size;
  if (given("--tournament")) cfg.search.tournament_size = f.tournament;
  if (given("--cycles")) cfg.search.cycles = f.cycles;
  if (given("--gen-size")) cfg.search.gen_size = f.gen_size;
  if (given("--seed")) cfg.search.seed = f.seed;
  if (given("--runs")) cfg.num_runs = f.runs;
  if (given("--benchmark")) {
    if (f.benchmark == "synthetic") {
      cfg.benchmark.path.reset();
    } else {
      cfg.benchmark.path = f.benchmark;
    }
  }
  if (given("--batch")) {
    if (f.batch == "synthetic") {
      cfg.batch.raw_path.reset();
    } else {
      cfg.batch.raw_path = f.batch;
    }
  }
  if (given("--out")) cfg.output = f.out;
  if (given("--threads")) cfg.threads = f.threads;
  if (given("--scorer")) {
    const std::string wrapped = fmt::format(R"({{"scorer": "{}"}})", f.scorer);
    cfg.scorer = gea::parse_experiment_config(wrapped).scorer;
  }
  if (given("--removal-mode")) cfg.search.removal_mode = gea::parse_removal_mode(f.removal_mode);
  if (given("--parent-mode")) cfg.search.parent_mode = gea::parse_parent_mode(f.parent_mode);
  if (given("--init-from")) cfg.init_population = f.init_from;
  if (given("--save-checkpoints")) cfg.save_checkpoints = f.save_checkpoints;
  for (const std::string& spec : f.sweeps) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw gea::ConfigError(fmt::format("sweep '{}' is not param=v1,v2", spec));
    gea::SweepAxis axis{spec.substr(0, eq), {}};
    std::string rest = spec.substr(eq + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      const auto comma = rest.find(',', start);
      axis.values.push_back(rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    cfg.sweep.push_back(std::move(axis));
  }
  return cfg;
}

void print_rows(const gea::ExperimentResult& result) {
  fmt::print("{:<40} {:>5} {:>16} {:>16} {:>14} {:>10}\n", "config", "runs", "val_acc", "test_acc",
             "search_time_s", "regret");
  for (const auto& row : result.rows) {
    fmt::print("{:<40} {:>5} {:>8.2f} ± {:<5.2f} {:>8.2f} ± {:<5.2f} {:>14.1f} {:>10.3f}\n", row.label,
               row.num_runs, row.mean_val_acc, row.std_val_acc, row.mean_test_acc, row.std_test_acc,
               row.mean_search_time_s, row.mean_regret);
  }
  fmt::print("global best: {} ({:.2f})\n", gea::encode_str(result.best_arch), result.best_record.val_acc);
}

int run_search_command(const CLI::App* app, const SearchFlags& flags) {
  const gea::ExperimentConfig cfg = resolve_config(app, flags);
  const gea::ExperimentResult result = gea::run_experiment(cfg);
  const auto files = gea::emit_results(result, cfg, cfg.output);
  print_rows(result);
  fmt::print("wrote {} and {}\n", files.curves_csv.string(), files.summary_json.string());
  return 0;
}

struct BenchFlags {
  std::string out;
  gea::SyntheticSpec spec;
};

int run_bench_gen(const BenchFlags& f) {
  const gea::Benchmark bench = gea::gen_synthetic(f.spec);
  gea::save_tabular(bench, f.out);
  const auto [arch, rec] = gea::best_of(bench);
  std::vector<double> val, proxy = *bench.synthetic_proxy;
  for (const auto& r : bench.records) val.push_back(r.val_acc);
  fmt::print("wrote {} ({} records); best {} val_acc {:.3f}; proxy tau {:.4f}\n", f.out,
             bench.records.size(), gea::encode_str(arch), rec.val_acc, gea::kendall_tau(val, proxy));
  return 0;
}

struct ScoreFlags {
  std::string arch;
  std::string config;
  std::string batch;
  std::uint64_t seed = 0;
};

int run_score(const CLI::App* app, const ScoreFlags& f) {
  gea::ExperimentConfig cfg;
  if (!f.config.empty()) cfg = gea::load_experiment_config(f.config);
  if (app->count("--batch") > 0 && f.batch != "synthetic") cfg.batch.raw_path = f.batch;
  std::vector<std::string> warnings;
  const gea::Batch batch = gea::resolve_batch(cfg.batch, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  gea::SkeletonConfig skeleton = cfg.skeleton;
  skeleton.input_channels = batch.images.dim(1);
  skeleton.input_hw = batch.images.dim(2);
  const gea::ArchEncoding arch = gea::decode_str(f.arch);
  gea::Rng rng(f.seed);
  const gea::ProxyScore s = gea::score_arch(arch, batch.images, batch.labels, skeleton, cfg.proxy, rng);
  json out = {{"arch", gea::encode_str(arch)}, {"seed", f.seed}};
  if (s.is_sentinel()) {
    out["score"] = "sentinel";
  } else {
    out["score"] = s.value();
    out["per_class"] = s.per_class();
  }
  std::cout << out.dump() << "\n";
  return 0;
}

struct StatsFlags {
  std::string a, b, label_a, label_b, benchmark;
};

std::vector<double> finals(const gea::LoadedSummary& s, const std::string& label) {
  std::vector<double> out;
  std::string chosen = label;
  if (chosen.empty()) {
    if (s.rows.size() != 1) throw gea::ConfigError("summary has several rows; pass a label");
    chosen = s.rows.front().label;
  }
  for (const auto& r : s.runs)
    if (r.label == chosen) out.push_back(r.val_acc);
  if (out.empty()) throw gea::ConfigError(fmt::format("no runs labeled '{}'", chosen));
  return out;
}

int run_ttest(const StatsFlags& f) {
  const gea::LoadedSummary a = gea::load_summary(f.a);
  const gea::LoadedSummary b = f.b.empty() ? a : gea::load_summary(f.b);
  const auto xa = finals(a, f.label_a), xb = finals(b, f.label_b);
  const gea::WelchResult r = gea::welch_ttest(xa, xb);
  std::cout << json{{"t", r.t}, {"df", r.df}, {"p", r.p}, {"mean_a", gea::mean(xa)},
                    {"mean_b", gea::mean(xb)}, {"significant_at_0.05", r.p < 0.05}}
                   .dump()
            << "\n";
  return 0;
}

int run_tau(const StatsFlags& f) {
  const gea::Benchmark bench = gea::load_tabular(f.benchmark);
  if (!bench.synthetic_proxy) throw gea::ConfigError("benchmark has no proxy column");
  std::vector<double> val;
  for (const auto& r : bench.records) val.push_back(r.val_acc);
  std::cout << json{{"kendall_tau", gea::kendall_tau(val, *bench.synthetic_proxy)}}.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guided evolutionary architecture search"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gea::tool_version()));

  SearchFlags search_flags;
  auto* search = app.add_subcommand("search", "Run one method/config for several seeds");
  add_search_flags(search, search_flags);

  SearchFlags ablate_flags;
  auto* ablate = app.add_subcommand("ablate", "Sweep search parameters");
  add_search_flags(ablate, ablate_flags);
  ablate->add_option("--sweep", ablate_flags.sweeps, "param=v1,v2,... (repeatable)");

  BenchFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "Benchmark utilities");
  bench->require_subcommand(1);
  auto* gen = bench->add_subcommand("gen", "Write a synthetic tabular benchmark");
  gen->add_option("--out", bench_flags.out, "Output file")->required();
  gen->add_option("--seed", bench_flags.spec.seed, "Landscape seed");
  gen->add_option("--noise-std", bench_flags.spec.noise_std, "Per-architecture noise");
  gen->add_option("--interaction-std", bench_flags.spec.interaction_std, "Edge interaction scale");
  gen->add_option("--proxy-tau", bench_flags.spec.target_proxy_tau, "Target proxy Kendall tau");
  gen->add_option("--dataset", bench_flags.spec.dataset_name, "Dataset name");

  ScoreFlags score_flags;
  auto* score = app.add_subcommand("score", "Zero-proxy score of one architecture");
  score->add_option("arch", score_flags.arch, "Canonical architecture string")->required();
  score->add_option("--config", score_flags.config, "Experiment config for batch/skeleton/proxy");
  score->add_option("--batch", score_flags.batch, "CIFAR-10 binary batch file, or 'synthetic'");
  score->add_option("--seed", score_flags.seed, "Network initialization seed");

  StatsFlags stats_flags;
  auto* stats = app.add_subcommand("stats", "Statistics on result files");
  stats->require_subcommand(1);
  auto* ttest = stats->add_subcommand("ttest", "Welch t-test on final val_acc of two run sets");
  ttest->add_option("--a", stats_flags.a, "summary.json")->required();
  ttest->add_option("--b", stats_flags.b, "summary.json (defaults to --a)");
  ttest->add_option("--label-a", stats_flags.label_a, "Row label within --a");
  ttest->add_option("--label-b", stats_flags.label_b, "Row label within --b");
  auto* tau = stats->add_subcommand("tau", "Kendall tau between a benchmark's proxy and val_acc");
  tau->add_option("--benchmark", stats_flags.benchmark, "Tabular benchmark with proxy column")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return code;
  }

  try {
    if (*search) return run_search_command(search, search_flags);
    if (*ablate) return run_search_command(ablate, ablate_flags);
    if (*gen) return run_bench_gen(bench_flags);
    if (*score) return run_score(score, score_flags);
    if (*ttest) return run_ttest(stats_flags);
    if (*tau) return run_tau(stats_flags);
  } catch (const gea::Error& e) {
    std::cerr << json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
