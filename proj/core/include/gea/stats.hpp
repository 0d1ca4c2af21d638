#pragma once

#include <span>

namespace gea {

double mean(std::span<const double> xs);

// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> xs);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

// Welch's unequal-variance t-test. Throws StatsError when either sample has
// fewer than two values or both variances are zero.
WelchResult welch_ttest(std::span<const double> a, std::span<const double> b);

// Kendall tau-b in O(n log n) (Knight's merge-sort count). NaN when either
// input is constant. Throws StatsError on length mismatch or n < 2.
double kendall_tau(std::span<const double> x, std::span<const double> y);

}  // namespace gea
