#include "gea/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gea/error.hpp"
#include "gea/stats.hpp"
#include "parallel.hpp"

#ifndef GEA_VERSION
#define GEA_VERSION "dev"
#endif

namespace gea {

using nlohmann::json;

std::string_view tool_version() { return GEA_VERSION; }

std::string_view to_string(Method m) {
  switch (m) {
    case Method::gea: return "gea";
    case Method::rea: return "rea";
    case Method::rs: return "rs";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  if (s == "gea") return Method::gea;
  if (s == "rea") return Method::rea;
  if (s == "rs") return Method::rs;
  throw ConfigError(fmt::format("unknown method '{}' (expected gea, rea or rs)", s));
}

namespace {

std::string_view to_string(ScorerKind k) {
  switch (k) {
    case ScorerKind::automatic: return "auto";
    case ScorerKind::network: return "network";
    case ScorerKind::table: return "table";
  }
  return "?";
}

ScorerKind parse_scorer(std::string_view s) {
  if (s == "auto") return ScorerKind::automatic;
  if (s == "network") return ScorerKind::network;
  if (s == "table") return ScorerKind::table;
  throw ConfigError(fmt::format("unknown scorer '{}' (expected auto, network or table)", s));
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!obj.is_object()) throw ConfigError(fmt::format("'{}' must be an object", where));
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(fmt::format("unknown key '{}' in '{}'", key, where));
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

template <typename T>
void read_optional(const json& obj, const char* key, std::optional<T>& out) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    out.reset();
  } else {
    out = obj.at(key).get<T>();
  }
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

void parse_search(const json& j, SearchConfig& s) {
  check_keys(j,
             {"pop_size", "tournament_size", "cycles", "gen_size", "init_candidates",
              "parent_mode", "removal_mode", "guided", "seed", "budget_counts_init",
              "proxy_cost_s", "parallel_children"},
             "search");
  read(j, "pop_size", s.pop_size);
  read(j, "tournament_size", s.tournament_size);
  read(j, "cycles", s.cycles);
  read_optional(j, "gen_size", s.gen_size);
  read_optional(j, "init_candidates", s.init_candidates);
  if (j.contains("parent_mode")) s.parent_mode = parse_parent_mode(j.at("parent_mode").get<std::string>());
  if (j.contains("removal_mode")) {
    s.removal_mode = parse_removal_mode(j.at("removal_mode").get<std::string>());
  }
  read(j, "guided", s.guided);
  read(j, "seed", s.seed);
  read(j, "budget_counts_init", s.budget_counts_init);
  read(j, "proxy_cost_s", s.proxy_cost_s);
  read(j, "parallel_children", s.parallel_children);
}

json search_json(const SearchConfig& s) {
  return {{"pop_size", s.pop_size},
          {"tournament_size", s.tournament_size},
          {"cycles", s.cycles},
          {"gen_size", optional_json(s.gen_size)},
          {"init_candidates", optional_json(s.init_candidates)},
          {"parent_mode", to_string(s.parent_mode)},
          {"removal_mode", to_string(s.removal_mode)},
          {"guided", s.guided},
          {"seed", s.seed},
          {"budget_counts_init", s.budget_counts_init},
          {"proxy_cost_s", s.proxy_cost_s},
          {"parallel_children", s.parallel_children}};
}

void parse_synthetic_bench(const json& j, SyntheticSpec& s) {
  check_keys(j, {"seed", "noise_std", "target_proxy_tau", "interaction_std", "dataset_name"},
             "benchmark.synthetic");
  read(j, "seed", s.seed);
  read(j, "noise_std", s.noise_std);
  read(j, "target_proxy_tau", s.target_proxy_tau);
  read(j, "interaction_std", s.interaction_std);
  read(j, "dataset_name", s.dataset_name);
}

void parse_synthetic_batch(const json& j, SyntheticBatchSpec& s) {
  check_keys(j, {"num_classes", "batch_size", "channels", "hw", "noise_scale", "seed"},
             "batch.synthetic");
  read(j, "num_classes", s.num_classes);
  read(j, "batch_size", s.batch_size);
  read(j, "channels", s.channels);
  read(j, "hw", s.hw);
  read(j, "noise_scale", s.noise_scale);
  read(j, "seed", s.seed);
}

void parse_skeleton(const json& j, SkeletonConfig& s) {
  check_keys(j,
             {"input_channels", "input_hw", "stem_channels", "cells_per_stage", "num_stages",
              "num_classes", "bn_eps"},
             "skeleton");
  read(j, "input_channels", s.input_channels);
  read(j, "input_hw", s.input_hw);
  read(j, "stem_channels", s.stem_channels);
  read(j, "cells_per_stage", s.cells_per_stage);
  read(j, "num_stages", s.num_stages);
  read(j, "num_classes", s.num_classes);
  read(j, "bn_eps", s.bn_eps);
}

std::size_t parse_count(std::string_view parameter, std::string_view value) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(fmt::format("sweep value '{}' for {} is not a non-negative integer", value,
                                  parameter));
  }
  return out;
}

bool parse_bool(std::string_view parameter, std::string_view value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError(fmt::format("sweep value '{}' for {} is not a boolean", value, parameter));
}

}  // namespace

void ExperimentConfig::validate() const {
  if (num_runs < 1) throw ConfigError("num_runs must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  for (const SweepAxis& axis : sweep) {
    if (axis.values.empty()) {
      throw ConfigError(fmt::format("sweep over '{}' has no values", axis.parameter));
    }
    ExperimentConfig probe = *this;
    for (const auto& v : axis.values) apply_parameter(probe, axis.parameter, v);
  }
  for (const SweepPoint& point : expand_sweep(*this)) {
    if (point.config.method != Method::rs) point.config.search.validate();
  }
  skeleton.validate();
  proxy.validate();
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("config parse error at byte {}: {}", e.byte, e.what()), e.byte);
  }
  ExperimentConfig cfg;
  try {
    check_keys(j,
               {"method", "search", "benchmark", "batch", "skeleton", "proxy", "scorer",
                "num_runs", "sweep", "output", "threads", "init_population", "save_checkpoints"},
               "config");
    if (j.contains("method")) cfg.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("search")) parse_search(j.at("search"), cfg.search);
    if (j.contains("benchmark")) {
      const json& b = j.at("benchmark");
      check_keys(b, {"path", "synthetic"}, "benchmark");
      read_optional(b, "path", cfg.benchmark.path);
      if (b.contains("synthetic")) parse_synthetic_bench(b.at("synthetic"), cfg.benchmark.synthetic);
    }
    if (j.contains("batch")) {
      const json& b = j.at("batch");
      check_keys(b, {"raw_path", "raw_count", "synthetic"}, "batch");
      read_optional(b, "raw_path", cfg.batch.raw_path);
      read(b, "raw_count", cfg.batch.raw_count);
      if (b.contains("synthetic")) parse_synthetic_batch(b.at("synthetic"), cfg.batch.synthetic);
    }
    if (j.contains("skeleton")) parse_skeleton(j.at("skeleton"), cfg.skeleton);
    if (j.contains("proxy")) {
      check_keys(j.at("proxy"), {"t", "tau"}, "proxy");
      read(j.at("proxy"), "t", cfg.proxy.t);
      read(j.at("proxy"), "tau", cfg.proxy.tau);
    }
    if (j.contains("scorer")) cfg.scorer = parse_scorer(j.at("scorer").get<std::string>());
    read(j, "num_runs", cfg.num_runs);
    read(j, "output", cfg.output);
    read(j, "threads", cfg.threads);
    read_optional(j, "init_population", cfg.init_population);
    read(j, "save_checkpoints", cfg.save_checkpoints);
    if (j.contains("sweep")) {
      for (const json& axis : j.at("sweep")) {
        check_keys(axis, {"parameter", "values"}, "sweep[]");
        SweepAxis a;
        a.parameter = axis.at("parameter").get<std::string>();
        for (const json& v : axis.at("values")) a.values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        cfg.sweep.push_back(std::move(a));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("invalid config: {}", e.what()));
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

namespace {

json config_json(const ExperimentConfig& cfg) {
  const auto& sb = cfg.benchmark.synthetic;
  const auto& sy = cfg.batch.synthetic;
  const auto& sk = cfg.skeleton;
  json sweep = json::array();
  for (const auto& axis : cfg.sweep) sweep.push_back({{"parameter", axis.parameter}, {"values", axis.values}});
  return {
      {"method", to_string(cfg.method)},
      {"search", search_json(cfg.search)},
      {"benchmark",
       {{"path", optional_json(cfg.benchmark.path)},
        {"synthetic",
         {{"seed", sb.seed},
          {"noise_std", sb.noise_std},
          {"target_proxy_tau", sb.target_proxy_tau},
          {"interaction_std", sb.interaction_std},
          {"dataset_name", sb.dataset_name}}}}},
      {"batch",
       {{"raw_path", optional_json(cfg.batch.raw_path)},
        {"raw_count", cfg.batch.raw_count},
        {"synthetic",
         {{"num_classes", sy.num_classes},
          {"batch_size", sy.batch_size},
          {"channels", sy.channels},
          {"hw", sy.hw},
          {"noise_scale", sy.noise_scale},
          {"seed", sy.seed}}}}},
      {"skeleton",
       {{"input_channels", sk.input_channels},
        {"input_hw", sk.input_hw},
        {"stem_channels", sk.stem_channels},
        {"cells_per_stage", sk.cells_per_stage},
        {"num_stages", sk.num_stages},
        {"num_classes", sk.num_classes},
        {"bn_eps", sk.bn_eps}}},
      {"proxy", {{"t", cfg.proxy.t}, {"tau", cfg.proxy.tau}}},
      {"scorer", to_string(cfg.scorer)},
      {"num_runs", cfg.num_runs},
      {"sweep", sweep},
      {"output", cfg.output},
      {"threads", cfg.threads},
      {"init_population", optional_json(cfg.init_population)},
      {"save_checkpoints", cfg.save_checkpoints},
  };
}

}  // namespace

std::string dump_experiment_config(const ExperimentConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

void apply_parameter(ExperimentConfig& cfg, std::string_view parameter, std::string_view value) {
  SearchConfig& s = cfg.search;
  if (parameter == "method") {
    cfg.method = parse_method(value);
  } else if (parameter == "pop_size") {
    s.pop_size = parse_count(parameter, value);
  } else if (parameter == "tournament_size") {
    s.tournament_size = parse_count(parameter, value);
  } else if (parameter == "cycles") {
    s.cycles = parse_count(parameter, value);
  } else if (parameter == "gen_size") {
    s.gen_size = parse_count(parameter, value);
  } else if (parameter == "init_candidates") {
    s.init_candidates = parse_count(parameter, value);
  } else if (parameter == "parent_mode") {
    s.parent_mode = parse_parent_mode(value);
  } else if (parameter == "removal_mode") {
    s.removal_mode = parse_removal_mode(value);
  } else if (parameter == "guided") {
    s.guided = parse_bool(parameter, value);
  } else if (parameter == "budget_counts_init") {
    s.budget_counts_init = parse_bool(parameter, value);
  } else if (parameter == "seed") {
    s.seed = parse_count(parameter, value);
  } else {
    throw ConfigError(fmt::format("'{}' is not a sweepable search parameter", parameter));
  }
}

namespace {

// Method-specific search semantics.
SearchConfig resolve_search(const ExperimentConfig& cfg) {
  SearchConfig s = cfg.search;
  switch (cfg.method) {
    case Method::gea:
      s.guided = true;
      break;
    case Method::rea:
      s.guided = false;
      s.gen_size = 1;
      s.init_candidates = s.pop_size;
      break;
    case Method::rs:
      s.guided = false;
      break;
  }
  return s;
}

}  // namespace

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg) {
  std::vector<SweepPoint> points{{std::string(to_string(cfg.method)), cfg}};
  bool first_axis = true;
  for (const SweepAxis& axis : cfg.sweep) {
    std::vector<SweepPoint> next;
    for (const SweepPoint& p : points) {
      for (const std::string& v : axis.values) {
        SweepPoint q = p;
        apply_parameter(q.config, axis.parameter, v);
        const std::string term = axis.parameter + "=" + v;
        q.label = first_axis ? term : p.label + ";" + term;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
    first_axis = false;
  }
  for (SweepPoint& p : points) {
    p.config.search = resolve_search(p.config);
    p.config.sweep.clear();
  }
  return points;
}

Benchmark resolve_benchmark(const BenchmarkSource& src) {
  if (src.path) return load_tabular(*src.path);
  return gen_synthetic(src.synthetic);
}

Batch resolve_batch(const BatchSource& src, std::vector<std::string>* warnings) {
  if (src.raw_path) return load_raw_batch(*src.raw_path, src.raw_count, warnings);
  return make_batch(src.synthetic);
}

SummaryRow summarize(std::string label, const std::vector<const RunResult*>& runs) {
  std::vector<double> val, test, time, regret;
  for (const RunResult* r : runs) {
    val.push_back(*r->trajectory.best.fitness);
    test.push_back(r->trajectory.best_test_acc);
    time.push_back(r->trajectory.counters.simulated_time_s());
    regret.push_back(r->regret);
  }
  SummaryRow row;
  row.label = std::move(label);
  row.num_runs = runs.size();
  row.mean_val_acc = mean(val);
  row.std_val_acc = stddev(val);
  row.mean_test_acc = mean(test);
  row.std_test_acc = stddev(test);
  row.mean_search_time_s = mean(time);
  row.mean_regret = mean(regret);
  return row;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Benchmark bench = resolve_benchmark(cfg.benchmark);
  return run_experiment(cfg, bench);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Benchmark& bench) {
  cfg.validate();
  const std::vector<SweepPoint> points = expand_sweep(cfg);
  const bool needs_scorer = std::any_of(points.begin(), points.end(), [](const SweepPoint& p) {
    return p.config.method == Method::gea;
  });

  ScorerKind kind = cfg.scorer;
  if (kind == ScorerKind::automatic) {
    kind = bench.synthetic_proxy ? ScorerKind::table : ScorerKind::network;
  }
  std::unique_ptr<Scorer> scorer;
  if (cfg.batch.raw_path || (needs_scorer && kind == ScorerKind::network)) {
    Batch batch = resolve_batch(cfg.batch);
    SkeletonConfig skeleton = cfg.skeleton;
    skeleton.input_channels = batch.images.dim(1);
    skeleton.input_hw = batch.images.dim(2);
    for (Label l : batch.labels) {
      if (static_cast<std::size_t>(l) >= skeleton.num_classes) {
        throw ConfigError(fmt::format("batch label {} exceeds skeleton num_classes {}", l,
                                      skeleton.num_classes));
      }
    }
    if (needs_scorer && kind == ScorerKind::network) {
      scorer = std::make_unique<NetworkScorer>(std::move(batch.images), std::move(batch.labels),
                                               skeleton, cfg.proxy);
    }
  }
  if (needs_scorer && kind == ScorerKind::table) scorer = std::make_unique<TableScorer>(bench);

  std::optional<Population> initial;
  if (cfg.init_population) initial = load_checkpoint(*cfg.init_population, bench.space);

  ExperimentResult result;
  std::tie(result.best_arch, result.best_record) = best_of(bench);

  const std::size_t total = points.size() * cfg.num_runs;
  result.runs.resize(total);
  const Rng master(cfg.search.seed);
  detail::for_each_index(total, cfg.threads, [&](std::size_t task) {
    const SweepPoint& point = points[task / cfg.num_runs];
    const std::size_t run_id = task % cfg.num_runs;
    const Rng run_rng = Rng(point.config.search.seed).split(run_id);
    RunResult& out = result.runs[task];
    out.label = point.label;
    out.run_id = run_id;
    if (point.config.method == Method::rs) {
      out.trajectory = run_random_search(point.config.search, bench, run_rng);
    } else {
      out.trajectory = run_search(point.config.search, bench, scorer.get(), run_rng,
                                  initial ? &*initial : nullptr);
    }
    out.regret = result.best_record.val_acc - *out.trajectory.best.fitness;
  });

  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<const RunResult*> runs;
    for (std::size_t r = 0; r < cfg.num_runs; ++r) runs.push_back(&result.runs[p * cfg.num_runs + r]);
    result.rows.push_back(summarize(points[p].label, runs));
  }
  return result;
}

std::string curves_csv(const ExperimentResult& result) {
  std::string out = "label,run_id,cycle,best_so_far,simulated_time_s\n";
  for (const RunResult& r : result.runs) {
    for (const CurvePoint& c : r.trajectory.curve) {
      out += fmt::format("{},{},{},{},{}\n", r.label, r.run_id, c.cycle, c.best_so_far,
                         c.simulated_time_s);
    }
  }
  return out;
}

std::string summary_json(const ExperimentResult& result, const ExperimentConfig& cfg) {
  json rows = json::array();
  for (const SummaryRow& row : result.rows) {
    rows.push_back({{"label", row.label},
                    {"num_runs", row.num_runs},
                    {"mean_val_acc", row.mean_val_acc},
                    {"std_val_acc", row.std_val_acc},
                    {"mean_test_acc", row.mean_test_acc},
                    {"std_test_acc", row.std_test_acc},
                    {"mean_search_time_s", row.mean_search_time_s},
                    {"mean_regret", row.mean_regret}});
  }
  json runs = json::array();
  for (const RunResult& r : result.runs) {
    const Trajectory& t = r.trajectory;
    runs.push_back({{"label", r.label},
                    {"run_id", r.run_id},
                    {"arch", encode_str(t.best.arch)},
                    {"val_acc", *t.best.fitness},
                    {"test_acc", t.best_test_acc},
                    {"regret", r.regret},
                    {"simulated_time_s", t.counters.simulated_time_s()},
                    {"proxy_evaluations", t.counters.proxy_evaluations},
                    {"oracle_queries", t.counters.oracle_queries},
                    {"cycles_executed", t.cycles_executed}});
  }
  json doc = {{"tool", "gea"},
              {"version", tool_version()},
              {"config", config_json(cfg)},
              {"global_best",
               {{"arch", encode_str(result.best_arch)}, {"val_acc", result.best_record.val_acc}}},
              {"rows", rows},
              {"runs", runs}};
  return doc.dump(2) + "\n";
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << content;
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace

EmittedFiles emit_results(const ExperimentResult& result, const ExperimentConfig& cfg,
                          const std::filesystem::path& dir) {
  if (result.runs.empty()) throw ConfigError("no runs to emit");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
  EmittedFiles files{dir / "curves.csv", dir / "summary.json"};
  write_file(files.curves_csv, curves_csv(result));
  write_file(files.summary_json, summary_json(result, cfg));
  if (cfg.save_checkpoints) {
    for (const RunResult& r : result.runs) {
      if (r.trajectory.final_population.empty()) continue;
      std::string name = fmt::format("checkpoint_{}_{}.json", r.label, r.run_id);
      std::replace_if(name.begin(), name.end(), [](char c) { return c == '=' || c == ';'; }, '-');
      save_checkpoint(r.trajectory.final_population, dir / name);
    }
  }
  return files;
}

LoadedSummary parse_summary(const std::string& json_text) {
  LoadedSummary out;
  try {
    const json doc = json::parse(json_text);
    for (const json& r : doc.at("rows")) {
      SummaryRow row;
      row.label = r.at("label").get<std::string>();
      row.num_runs = r.at("num_runs").get<std::size_t>();
      row.mean_val_acc = r.at("mean_val_acc").get<double>();
      row.std_val_acc = r.at("std_val_acc").get<double>();
      row.mean_test_acc = r.at("mean_test_acc").get<double>();
      row.std_test_acc = r.at("std_test_acc").get<double>();
      row.mean_search_time_s = r.at("mean_search_time_s").get<double>();
      row.mean_regret = r.at("mean_regret").get<double>();
      out.rows.push_back(std::move(row));
    }
    for (const json& r : doc.at("runs")) {
      RunFinal f;
      f.label = r.at("label").get<std::string>();
      f.run_id = r.at("run_id").get<std::size_t>();
      f.arch = r.at("arch").get<std::string>();
      f.val_acc = r.at("val_acc").get<double>();
      f.test_acc = r.at("test_acc").get<double>();
      f.regret = r.at("regret").get<double>();
      f.simulated_time_s = r.at("simulated_time_s").get<double>();
      out.runs.push_back(std::move(f));
    }
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("summary parse error at byte {}: {}", e.byte, e.what()), e.byte);
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("summary malformed: {}", e.what()), 0);
  }
  return out;
}

LoadedSummary load_summary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open summary '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_summary(ss.str());
}

}  // namespace gea
