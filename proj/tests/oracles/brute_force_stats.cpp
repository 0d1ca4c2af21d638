#include "oracles/brute_force_stats.hpp"

#include <cmath>

namespace gea::oracles {

double kendall_tau_pairs(std::span<const double> x, std::span<const double> y) {
  double concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++ties_x;
      } else if (dy == 0) {
        ++ties_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  return (concordant - discordant) /
         std::sqrt((concordant + discordant + ties_x) * (concordant + discordant + ties_y));
}

}  // namespace gea::oracles
