#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gea/error.hpp"
#include "gea/rng.hpp"
#include "gea/stats.hpp"
#include "oracles/brute_force_stats.hpp"

namespace {

using namespace gea;

TEST(Stats, MeanAndSampleStddev) {
  const std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(mean(xs), 5.0);
  EXPECT_NEAR(stddev(xs), 2.138089935299395, 1e-14);
  const std::vector<double> one{3};
  EXPECT_EQ(stddev(one), 0.0);
}

// Reference values from scipy.stats.ttest_ind(a, b, equal_var=False).
const std::vector<double> kWelchA{27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1,
                                  21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4};
const std::vector<double> kWelchB{27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8,
                                  22.0, 24.8, 20.2, 21.9, 22.8, 23.2};

TEST(Welch, MatchesScipy) {
  const WelchResult r = welch_ttest(kWelchA, kWelchB);
  EXPECT_NEAR(r.t, -2.588576618385154, 1e-9);
  EXPECT_NEAR(r.df, 24.770825994815898, 1e-9);
  EXPECT_NEAR(r.p, 0.015894777835847574, 1e-9);
}

TEST(Welch, SwapNegatesT) {
  const WelchResult ab = welch_ttest(kWelchA, kWelchB), ba = welch_ttest(kWelchB, kWelchA);
  EXPECT_DOUBLE_EQ(ab.t, -ba.t);
  EXPECT_DOUBLE_EQ(ab.p, ba.p);
}

TEST(Welch, ScaleInvariant) {
  std::vector<double> a = kWelchA, b = kWelchB;
  for (double& v : a) v *= 10;
  for (double& v : b) v *= 10;
  const WelchResult base = welch_ttest(kWelchA, kWelchB), scaled = welch_ttest(a, b);
  EXPECT_NEAR(scaled.t, base.t, 1e-12);
  EXPECT_NEAR(scaled.p, base.p, 1e-12);
}

TEST(Welch, IdenticalSamplesGiveUnitP) {
  const std::vector<double> a{1, 2, 3, 4};
  const WelchResult r = welch_ttest(a, a);
  EXPECT_EQ(r.t, 0.0);
  EXPECT_NEAR(r.p, 1.0, 1e-12);
}

TEST(Welch, Errors) {
  const std::vector<double> one{1}, two{1, 2}, flat{3, 3};
  EXPECT_THROW(welch_ttest(one, two), StatsError);
  EXPECT_THROW(welch_ttest(flat, flat), StatsError);
}

TEST(Kendall, KnownValues) {
  const std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4};
  EXPECT_NEAR(kendall_tau(a, b), 0.6666666666666669, 1e-12);
  const std::vector<double> c{1, 1, 2, 3, 3, 4}, d{2, 1, 2, 5, 3, 3};
  EXPECT_NEAR(kendall_tau(c, d), 0.6923076923076924, 1e-12);
  const std::vector<double> e{17, 86, 60, 77, 47, 3, 70, 47, 88, 92};
  const std::vector<double> f{70, 29, 85, 61, 80, 34, 60, 31, 73, 66};
  EXPECT_NEAR(kendall_tau(e, f), 0.04494665749754947, 1e-12);
}

TEST(Kendall, PerfectAndReversed) {
  const std::vector<double> a{1, 2, 3, 4, 5}, r{5, 4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(kendall_tau(a, a), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(a, r), -1.0);
}

TEST(Kendall, MonotoneTransformInvariance) {
  const std::vector<double> x{0.3, -1.2, 2.5, 0.7, 0.0, 1.1}, y{1, 4, 2, 2, 5, 0};
  std::vector<double> fx;
  for (double v : x) fx.push_back(std::exp(3 * v) - 2);
  EXPECT_NEAR(kendall_tau(fx, y), kendall_tau(x, y), 1e-15);
}

TEST(Kendall, ConstantIsNaN) {
  const std::vector<double> a{1, 2, 3}, c{7, 7, 7};
  EXPECT_TRUE(std::isnan(kendall_tau(a, c)));
}

TEST(Kendall, Errors) {
  const std::vector<double> a{1, 2, 3}, b{1, 2}, one{1};
  EXPECT_THROW(kendall_tau(a, b), StatsError);
  EXPECT_THROW(kendall_tau(one, one), StatsError);
}

TEST(Kendall, MatchesPairEnumerationWithTies) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(300);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.uniform_int(trial % 2 ? 10 : 1000));
      y[i] = static_cast<double>(rng.uniform_int(trial % 3 ? 7 : 1000));
    }
    const double fast = kendall_tau(x, y), slow = oracles::kendall_tau_pairs(x, y);
    if (std::isnan(slow)) {
      EXPECT_TRUE(std::isnan(fast));
    } else {
      EXPECT_NEAR(fast, slow, 1e-12) << "n=" << n;
    }
  }
}

}  // namespace
