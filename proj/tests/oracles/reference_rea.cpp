#include "oracles/reference_rea.hpp"

#include <algorithm>
#include <deque>

namespace gea::oracles {

std::vector<ReaEvent> reference_rea(const Benchmark& bench, std::size_t pop_size,
                                    std::size_t tournament_size, std::size_t cycles, const Rng& run) {
  struct Member {
    ArchEncoding arch;
    double fitness;
  };
  std::deque<Member> population;
  std::vector<ReaEvent> events;
  auto train = [&](const ArchEncoding& arch) {
    const double f = bench.records[arch.index()].val_acc;
    const double best = events.empty() ? f : std::max(events.back().best_so_far, f);
    events.push_back({arch, f, best});
    population.push_back({arch, f});
  };

  for (std::size_t i = 0; i < pop_size; ++i) {
    Rng r = run.split(1).split(i);
    train(random_arch(r));
  }
  for (std::size_t c = 1; events.size() < cycles; ++c) {
    Rng sel = run.split(2).split(c);
    std::vector<std::size_t> sample;
    for (std::size_t k = 0; k < tournament_size; ++k) sample.push_back(sel.uniform_int(population.size()));
    std::size_t parent = sample[0];
    for (std::size_t idx : sample)
      if (population[idx].fitness > population[parent].fitness) parent = idx;
    Rng mut = run.split(3).split(c).split(0);
    train(mutate(population[parent].arch, mut));
    population.pop_front();
  }
  return events;
}

}  // namespace gea::oracles
