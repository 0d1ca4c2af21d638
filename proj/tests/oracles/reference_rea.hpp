#pragma once

#include <cstddef>
#include <vector>

#include "gea/cellspace.hpp"
#include "gea/oracle.hpp"
#include "gea/rng.hpp"

namespace gea::oracles {

struct ReaEvent {
  ArchEncoding arch;
  double fitness = 0.0;
  double best_so_far = 0.0;
};

// Plain aging evolution written directly from its textbook description, drawing
// from the same streams as the library: init sample i from R.split(1).split(i),
// the tournament of cycle c from R.split(2).split(c), and the mutation of cycle
// c from R.split(3).split(c).split(0).
std::vector<ReaEvent> reference_rea(const Benchmark& bench, std::size_t pop_size,
                                    std::size_t tournament_size, std::size_t cycles, const Rng& run);

}  // namespace gea::oracles
