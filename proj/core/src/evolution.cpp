#include "gea/evolution.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "gea/error.hpp"
#include "parallel.hpp"

namespace gea {

std::string_view to_string(ParentMode m) {
  switch (m) {
    case ParentMode::tournament: return "tournament";
    case ParentMode::highest: return "highest";
    case ParentMode::lowest: return "lowest";
  }
  return "?";
}

std::string_view to_string(RemovalMode m) {
  switch (m) {
    case RemovalMode::oldest: return "oldest";
    case RemovalMode::highest: return "highest";
    case RemovalMode::lowest: return "lowest";
  }
  return "?";
}

ParentMode parse_parent_mode(std::string_view s) {
  if (s == "tournament") return ParentMode::tournament;
  if (s == "highest") return ParentMode::highest;
  if (s == "lowest") return ParentMode::lowest;
  throw ConfigError(fmt::format("unknown parent_mode '{}'", s));
}

RemovalMode parse_removal_mode(std::string_view s) {
  if (s == "oldest") return RemovalMode::oldest;
  if (s == "highest") return RemovalMode::highest;
  if (s == "lowest") return RemovalMode::lowest;
  throw ConfigError(fmt::format("unknown removal_mode '{}'", s));
}

std::size_t SearchConfig::effective_gen_size() const {
  if (!guided) return 1;
  return gen_size.value_or(pop_size);
}

std::size_t SearchConfig::effective_init_candidates() const {
  return init_candidates.value_or(guided ? cycles : pop_size);
}

std::size_t SearchConfig::evolution_cycles() const {
  return budget_counts_init ? cycles - pop_size : cycles;
}

void SearchConfig::validate() const {
  if (tournament_size < 1) throw ConfigError("tournament_size must be >= 1");
  if (pop_size < 1) throw ConfigError("pop_size must be >= 1");
  if (pop_size > effective_init_candidates()) {
    throw ConfigError(fmt::format("pop_size {} exceeds init_candidates {}", pop_size,
                                  effective_init_candidates()));
  }
  if (cycles < pop_size) {
    throw ConfigError(fmt::format("cycles {} must be >= pop_size {}", cycles, pop_size));
  }
  if (gen_size && *gen_size < 1) throw ConfigError("gen_size must be >= 1");
  if (!(proxy_cost_s >= 0.0)) throw ConfigError("proxy_cost_s must be >= 0");
}

NetworkScorer::NetworkScorer(Tensor batch, std::vector<Label> labels, SkeletonConfig skeleton,
                             ProxyParams params)
    : batch_(std::move(batch)),
      labels_(std::move(labels)),
      skeleton_(skeleton),
      params_(params) {
  skeleton_.validate();
  params_.validate();
}

ProxyScore NetworkScorer::score(const ArchEncoding& arch, Rng& rng) const {
  return score_arch(arch, batch_, labels_, skeleton_, params_, rng);
}

TableScorer::TableScorer(const Benchmark& bench) : bench_(&bench) {
  if (!bench.synthetic_proxy) throw ConfigError("benchmark has no synthetic proxy map");
}

ProxyScore TableScorer::score(const ArchEncoding& arch, Rng&) const {
  return ProxyScore(*bench_->proxy(arch), {});
}

namespace {

std::size_t workers_for(const SearchConfig& cfg) {
  return cfg.parallel_children ? detail::default_workers() : 1;
}

// Index of the fittest individual; lowest birth_index on ties.
template <typename Better>
std::size_t extreme_fitness(const Population& pop, Better better) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pop.size(); ++i) {
    const double a = *pop[i].fitness, b = *pop[best].fitness;
    if (better(a, b) || (a == b && pop[i].birth_index < pop[best].birth_index)) best = i;
  }
  return best;
}

void train(Individual& ind, const Benchmark& oracle, SearchCounters& counters) {
  const FitnessRecord& rec = oracle.query(ind.arch);
  ind.fitness = rec.val_acc;
  counters.train_time_s += rec.train_time_s;
  ++counters.oracle_queries;
}

}  // namespace

InitResult init_population(const SearchConfig& cfg, const Benchmark& oracle, const Scorer* scorer,
                           const Rng& run_rng) {
  cfg.validate();
  if (cfg.guided && scorer == nullptr) throw ConfigError("guided search needs a scorer");
  const std::size_t n = cfg.effective_init_candidates();
  const Rng init_stream = run_rng.split(kInitStream);

  InitResult out;
  std::vector<Individual> candidates(n);
  std::vector<double> rank_key(n);
  detail::for_each_index(n, workers_for(cfg), [&](std::size_t i) {
    Rng r = init_stream.split(i);
    Individual& ind = candidates[i];
    ind.arch = random_arch(r);
    ind.birth_index = i;
    if (cfg.guided) {
      Rng s = r.split(0);
      ind.proxy = scorer->score(ind.arch, s);
      rank_key[i] = ind.proxy->value();
    } else {
      rank_key[i] = r.uniform();
    }
  });
  out.counters.next_birth = n;
  if (cfg.guided) {
    out.counters.proxy_evaluations = n;
    out.counters.proxy_time_s = static_cast<double>(n) * cfg.proxy_cost_s;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rank_key[a] > rank_key[b]; });
  order.resize(cfg.pop_size);
  std::sort(order.begin(), order.end());

  for (std::size_t i : order) {
    Individual ind = candidates[i];
    train(ind, oracle, out.counters);
    out.population.push_back(ind);
    out.history.push_back(ind);
  }
  return out;
}

const Individual& tournament_select(const Population& pop, const SearchConfig& cfg, Rng& rng) {
  if (pop.empty()) throw ConfigError("cannot select from an empty population");
  switch (cfg.parent_mode) {
    case ParentMode::highest:
      return pop[extreme_fitness(pop, std::greater<>())];
    case ParentMode::lowest:
      return pop[extreme_fitness(pop, std::less<>())];
    case ParentMode::tournament:
      break;
  }
  std::size_t best = rng.uniform_int(pop.size());
  for (std::size_t k = 1; k < cfg.tournament_size; ++k) {
    const std::size_t idx = rng.uniform_int(pop.size());
    if (*pop[idx].fitness > *pop[best].fitness) best = idx;
  }
  return pop[best];
}

Child spawn_generation(const Individual& parent, const SearchConfig& cfg, const Scorer* scorer,
                       const Rng& rng, std::size_t* proxy_evaluations) {
  const std::size_t g = cfg.effective_gen_size();
  if (cfg.guided && scorer == nullptr) throw ConfigError("guided search needs a scorer");
  std::vector<Child> children(g);
  detail::for_each_index(g, workers_for(cfg), [&](std::size_t j) {
    Rng r = rng.split(j);
    Child& child = children[j];
    child.child_index = j;
    child.arch = mutate(parent.arch, r);
    if (cfg.guided) {
      Rng s = r.split(0);
      child.proxy = scorer->score(child.arch, s);
    }
  });
  if (cfg.guided && proxy_evaluations) *proxy_evaluations += g;

  std::size_t best = 0;
  if (cfg.guided) {
    for (std::size_t j = 1; j < g; ++j) {
      if (children[j].proxy->value() > children[best].proxy->value()) best = j;
    }
  }
  return children[best];
}

Individual remove_survivor(Population& pop, const SearchConfig& cfg) {
  if (pop.empty()) throw ConfigError("cannot remove from an empty population");
  std::size_t idx = 0;
  switch (cfg.removal_mode) {
    case RemovalMode::oldest:
      idx = 0;
      break;
    case RemovalMode::highest:
      idx = extreme_fitness(pop, std::greater<>());
      break;
    case RemovalMode::lowest:
      idx = extreme_fitness(pop, std::less<>());
      break;
  }
  Individual removed = pop[idx];
  pop.erase(pop.begin() + static_cast<std::ptrdiff_t>(idx));
  return removed;
}

namespace {

void record_event(Trajectory& tr, const Individual& ind) {
  const double prev = tr.events.empty() ? *ind.fitness : tr.events.back().best_so_far;
  TrajectoryEvent ev;
  ev.event_index = tr.events.size();
  ev.arch = ind.arch;
  ev.proxy = ind.proxy;
  ev.fitness = *ind.fitness;
  ev.best_so_far = std::max(prev, *ind.fitness);
  ev.simulated_time_s = tr.counters.simulated_time_s();
  tr.events.push_back(ev);
}

void record_curve(Trajectory& tr, std::size_t cycle) {
  tr.curve.push_back({cycle, tr.events.back().best_so_far, tr.counters.simulated_time_s()});
}

void finalize(Trajectory& tr, const Benchmark& oracle) {
  const Individual* best = &tr.history.front();
  for (const Individual& ind : tr.history) {
    if (*ind.fitness > *best->fitness ||
        (*ind.fitness == *best->fitness && ind.birth_index < best->birth_index)) {
      best = &ind;
    }
  }
  tr.best = *best;
  tr.best_test_acc = oracle.query(best->arch).test_acc;
}

}  // namespace

Trajectory run_search(const SearchConfig& cfg, const Benchmark& oracle, const Scorer* scorer,
                      const Rng& run_rng, const Population* initial_population) {
  cfg.validate();
  if (cfg.guided && scorer == nullptr) throw ConfigError("guided search needs a scorer");

  Trajectory tr;
  Population pop;
  if (initial_population) {
    if (initial_population->size() != cfg.pop_size) {
      throw ConfigError(fmt::format("checkpoint holds {} individuals but pop_size is {}",
                                    initial_population->size(), cfg.pop_size));
    }
    std::uint64_t next_birth = 0;
    for (Individual ind : *initial_population) {
      ind.origin = {};
      train(ind, oracle, tr.counters);
      next_birth = std::max(next_birth, ind.birth_index + 1);
      pop.push_back(ind);
      tr.history.push_back(ind);
      record_event(tr, ind);
    }
    tr.counters.next_birth = next_birth;
  } else {
    InitResult init = init_population(cfg, oracle, scorer, run_rng);
    pop = std::move(init.population);
    tr.history = std::move(init.history);
    // Replay the init trainings as events with cumulative cost.
    tr.counters = init.counters;
    tr.counters.train_time_s = 0.0;
    for (const Individual& ind : tr.history) {
      tr.counters.train_time_s += oracle.query(ind.arch).train_time_s;
      record_event(tr, ind);
    }
  }
  record_curve(tr, 0);

  const Rng select_stream = run_rng.split(kSelectStream);
  const Rng child_stream = run_rng.split(kChildStream);
  const std::size_t total_cycles = cfg.evolution_cycles();
  for (std::size_t cycle = 1; cycle <= total_cycles; ++cycle) {
    Rng sel = select_stream.split(cycle);
    const Individual parent = tournament_select(pop, cfg, sel);
    const std::size_t before = tr.counters.proxy_evaluations;
    Child child = spawn_generation(parent, cfg, scorer, child_stream.split(cycle),
                                   &tr.counters.proxy_evaluations);
    tr.counters.proxy_time_s +=
        static_cast<double>(tr.counters.proxy_evaluations - before) * cfg.proxy_cost_s;

    Individual ind;
    ind.arch = child.arch;
    ind.proxy = std::move(child.proxy);
    ind.birth_index = tr.counters.next_birth++;
    ind.origin = {Origin::Kind::cycle, cycle};
    train(ind, oracle, tr.counters);
    pop.push_back(ind);
    tr.history.push_back(ind);
    record_event(tr, ind);
    remove_survivor(pop, cfg);
    record_curve(tr, cycle);
    tr.cycles_executed = cycle;
  }

  tr.final_population = std::move(pop);
  finalize(tr, oracle);
  return tr;
}

Trajectory run_random_search(const SearchConfig& cfg, const Benchmark& oracle, const Rng& run_rng) {
  if (cfg.cycles < 1) throw ConfigError("random search needs cycles >= 1");
  Trajectory tr;
  const Rng stream = run_rng.split(kInitStream);
  const std::size_t warmup = std::min(cfg.pop_size, cfg.cycles);
  for (std::size_t i = 0; i < cfg.cycles; ++i) {
    Rng r = stream.split(i);
    Individual ind;
    ind.arch = random_arch(r);
    ind.birth_index = tr.counters.next_birth++;
    if (i >= warmup) ind.origin = {Origin::Kind::cycle, i - warmup + 1};
    train(ind, oracle, tr.counters);
    tr.history.push_back(ind);
    record_event(tr, ind);
    if (i + 1 >= warmup) record_curve(tr, i + 1 - warmup);
  }
  tr.cycles_executed = cfg.cycles - warmup;
  finalize(tr, oracle);
  return tr;
}

}  // namespace gea
