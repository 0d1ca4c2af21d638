#include "gea/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "gea/error.hpp"

namespace gea {

double mean(std::span<const double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

WelchResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw StatsError(fmt::format("welch_ttest needs >= 2 values per sample (got {} and {})",
                                 a.size(), b.size()));
  }
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double va = std::pow(stddev(a), 2) / na;
  const double vb = std::pow(stddev(b), 2) / nb;
  if (va + vb == 0.0) throw StatsError("welch_ttest: both samples have zero variance");

  WelchResult r;
  r.t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  const boost::math::students_t dist(r.df);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  return r;
}

namespace {

// Number of tied pairs within runs of equal values in a sorted sequence.
template <typename Eq>
std::uint64_t tied_pairs(std::size_t n, Eq equal) {
  std::uint64_t pairs = 0, run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      pairs += run * (run - 1) / 2;
      run = 1;
    }
  }
  return pairs;
}

// Stable merge sort of `v` counting inversions (strictly greater before smaller).
std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                          std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw StatsError(fmt::format("kendall_tau length mismatch: {} vs {}", x.size(), y.size()));
  }
  const std::size_t n = x.size();
  if (n < 2) throw StatsError("kendall_tau needs at least two points");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];

  const std::uint64_t x_ties = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return x[order[a]] == x[order[b]];
  });
  const std::uint64_t joint_ties = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return x[order[a]] == x[order[b]] && ys[a] == ys[b];
  });
  std::vector<double> buf(n);
  const std::uint64_t swaps = merge_count(ys, buf, 0, n);
  const std::uint64_t y_ties = tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });

  const double total = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double numer = total - static_cast<double>(x_ties) - static_cast<double>(y_ties) +
                       static_cast<double>(joint_ties) - 2.0 * static_cast<double>(swaps);
  const double denom = std::sqrt((total - static_cast<double>(x_ties)) *
                                 (total - static_cast<double>(y_ties)));
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return numer / denom;
}

}  // namespace gea
