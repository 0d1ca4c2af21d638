#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gea/cellspace.hpp"
#include "gea/network.hpp"
#include "gea/oracle.hpp"
#include "gea/rng.hpp"
#include "gea/zeroproxy.hpp"

namespace gea {

enum class ParentMode { tournament, highest, lowest };
enum class RemovalMode { oldest, highest, lowest };

std::string_view to_string(ParentMode m);
std::string_view to_string(RemovalMode m);
ParentMode parse_parent_mode(std::string_view s);
RemovalMode parse_removal_mode(std::string_view s);

struct SearchConfig {
  std::size_t pop_size = 10;         // P
  std::size_t tournament_size = 5;   // S
  std::size_t cycles = 200;          // C, the trained-architecture budget
  std::optional<std::size_t> gen_size;         // children per cycle; default pop_size
  std::optional<std::size_t> init_candidates;  // default cycles (guided) or pop_size
  ParentMode parent_mode = ParentMode::tournament;
  RemovalMode removal_mode = RemovalMode::oldest;
  bool guided = true;
  std::uint64_t seed = 0;
  // When set, the initial population counts toward C (history capped at C);
  // otherwise C evolution cycles run after initialization.
  bool budget_counts_init = true;
  double proxy_cost_s = 0.05;  // simulated seconds charged per proxy evaluation
  bool parallel_children = false;

  std::size_t effective_gen_size() const;
  std::size_t effective_init_candidates() const;
  // Number of evolution cycles a run performs.
  std::size_t evolution_cycles() const;

  // Throws ConfigError.
  void validate() const;
};

struct Origin {
  enum class Kind { init, cycle } kind = Kind::init;
  std::size_t cycle = 0;

  friend bool operator==(const Origin&, const Origin&) = default;
};

struct Individual {
  ArchEncoding arch;
  std::optional<double> fitness;
  std::optional<ProxyScore> proxy;
  std::uint64_t birth_index = 0;
  Origin origin;

  friend bool operator==(const Individual&, const Individual&) = default;
};

// Oldest at the front.
using Population = std::deque<Individual>;

// Zero-cost scoring of a candidate. Implementations must be safe to call
// concurrently; `rng` is the candidate's private substream.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual ProxyScore score(const ArchEncoding& arch, Rng& rng) const = 0;
};

// Jacobian-covariance score of a freshly initialized network on a fixed batch.
class NetworkScorer final : public Scorer {
 public:
  NetworkScorer(Tensor batch, std::vector<Label> labels, SkeletonConfig skeleton, ProxyParams params);
  ProxyScore score(const ArchEncoding& arch, Rng& rng) const override;

 private:
  Tensor batch_;
  std::vector<Label> labels_;
  SkeletonConfig skeleton_;
  ProxyParams params_;
};

// Looks up a benchmark's precomputed synthetic proxy map.
class TableScorer final : public Scorer {
 public:
  explicit TableScorer(const Benchmark& bench);
  ProxyScore score(const ArchEncoding& arch, Rng& rng) const override;

 private:
  const Benchmark* bench_;
};

class FunctionScorer final : public Scorer {
 public:
  using Fn = std::function<ProxyScore(const ArchEncoding&, Rng&)>;
  explicit FunctionScorer(Fn fn) : fn_(std::move(fn)) {}
  ProxyScore score(const ArchEncoding& arch, Rng& rng) const override { return fn_(arch, rng); }

 private:
  Fn fn_;
};

struct TrajectoryEvent {
  std::size_t event_index = 0;
  ArchEncoding arch;
  std::optional<ProxyScore> proxy;
  double fitness = 0.0;
  double best_so_far = 0.0;
  double simulated_time_s = 0.0;
};

// Best-so-far after initialization (cycle 0) and after every evolution cycle.
struct CurvePoint {
  std::size_t cycle = 0;
  double best_so_far = 0.0;
  double simulated_time_s = 0.0;
};

struct SearchCounters {
  std::size_t proxy_evaluations = 0;
  std::size_t oracle_queries = 0;
  double train_time_s = 0.0;
  double proxy_time_s = 0.0;
  std::uint64_t next_birth = 0;

  double simulated_time_s() const { return train_time_s + proxy_time_s; }
};

struct Trajectory {
  std::vector<TrajectoryEvent> events;  // one per trained architecture
  std::vector<CurvePoint> curve;
  std::vector<Individual> history;
  Population final_population;
  Individual best;
  double best_test_acc = 0.0;
  SearchCounters counters;
  std::size_t cycles_executed = 0;
};

// Random-stream layout. The run stream R passed to run_search derives:
//   init candidate i:     R.split(kInitStream).split(i)   (arch, then its scorer
//                         stream is .split(0); REA placeholder uses one uniform)
//   parent selection c:   R.split(kSelectStream).split(c)
//   children of cycle c:  R.split(kChildStream).split(c); child j uses .split(j)
//                         for its mutation and .split(j).split(0) for scoring
// Cycles are numbered from 1.
inline constexpr std::uint64_t kInitStream = 1;
inline constexpr std::uint64_t kSelectStream = 2;
inline constexpr std::uint64_t kChildStream = 3;

struct InitResult {
  Population population;
  std::vector<Individual> history;
  SearchCounters counters;
};

// Samples init_candidates architectures, keeps the pop_size best by proxy
// (lower birth_index on ties) and trains them. Unguided runs rank by a uniform
// placeholder score instead of the proxy.
InitResult init_population(const SearchConfig& cfg, const Benchmark& oracle, const Scorer* scorer,
                           const Rng& run_rng);

// Tournament: S uniform draws with replacement, fittest wins (earliest draw on
// ties). highest/lowest: population-wide extreme (lowest birth_index on ties).
const Individual& tournament_select(const Population& pop, const SearchConfig& cfg, Rng& rng);

struct Child {
  ArchEncoding arch;
  std::optional<ProxyScore> proxy;
  std::size_t child_index = 0;
};

// gen_size mutants of the parent, child j drawn from rng.split(j); returns the
// best by proxy (lowest index on ties, child 0 when all are sentinels).
// Unguided configs produce a single unscored child.
Child spawn_generation(const Individual& parent, const SearchConfig& cfg, const Scorer* scorer,
                       const Rng& rng, std::size_t* proxy_evaluations = nullptr);

// Removes one individual according to removal_mode and returns it.
Individual remove_survivor(Population& pop, const SearchConfig& cfg);

// One full search. With `initial_population`, its members are re-queried on
// `oracle` and form the first history entries instead of a fresh init.
Trajectory run_search(const SearchConfig& cfg, const Benchmark& oracle, const Scorer* scorer,
                      const Rng& run_rng, const Population* initial_population = nullptr);

// C independent uniform samples, each trained; answer is the argmax. Curve
// points follow the same schedule as run_search (pop_size samples at cycle 0).
Trajectory run_random_search(const SearchConfig& cfg, const Benchmark& oracle, const Rng& run_rng);

void save_checkpoint(const Population& pop, const std::filesystem::path& path);
std::string dump_checkpoint(const Population& pop);
Population load_checkpoint(const std::filesystem::path& path,
                           const SpaceDescriptor& space = SpaceDescriptor{});
Population parse_checkpoint(const std::string& text, const SpaceDescriptor& space = SpaceDescriptor{});

}  // namespace gea
