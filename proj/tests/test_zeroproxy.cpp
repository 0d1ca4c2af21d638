#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gea/error.hpp"
#include "gea/zeroproxy.hpp"
#include "oracles/reference_proxy.hpp"
#include "support.hpp"

namespace {

using namespace gea;
using gea::testing::random_batch;
using gea::testing::random_tensor;
using gea::testing::tiny_skeleton;

constexpr double kInf = std::numeric_limits<double>::infinity();

ClassCorr corr_of(std::vector<double> values) {
  const auto n = static_cast<std::size_t>(std::lround(std::sqrt(values.size())));
  return ClassCorr{0, Tensor({n, n}, std::move(values))};
}

JacobianBatch jac_of(std::size_t n, std::size_t d, std::vector<double> values, std::vector<Label> labels) {
  return JacobianBatch{Tensor({n, d}, std::move(values)), std::move(labels)};
}

TEST(ProxyParams, Validate) {
  EXPECT_NO_THROW(ProxyParams{}.validate());
  EXPECT_THROW((ProxyParams{0.0, 100}).validate(), ConfigError);
  EXPECT_THROW((ProxyParams{1e-5, 0.5}).validate(), ConfigError);
}

TEST(Correlation, IdenticalRows) {
  const auto c = per_class_correlation(jac_of(2, 3, {1, 2, 4, 1, 2, 4}, {5, 5}));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].class_id, 5);
  for (double v : c[0].sigma.data()) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(Correlation, NegatedRows) {
  const auto c = per_class_correlation(jac_of(2, 3, {1, 2, 4, -1, -2, -4}, {0, 0}));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c[0].sigma.at(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(c[0].sigma.at(0, 1), -1.0, 1e-15);
  EXPECT_NEAR(c[0].sigma.at(1, 0), -1.0, 1e-15);
}

TEST(Correlation, MatchesTextbookPearson) {
  Rng rng(1);
  const Tensor rows = random_tensor({3, 8}, rng);
  const auto c = per_class_correlation(JacobianBatch{rows, {2, 2, 2}});
  ASSERT_EQ(c.size(), 1u);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const double want = i == j ? 1.0
                                 : oracles::pearson(rows.data().subspan(i * 8, 8),
                                                    rows.data().subspan(j * 8, 8));
      EXPECT_NEAR(c[0].sigma.at(i, j), want, 1e-12);
    }
}

TEST(Correlation, DropsSingletonClassesAndOrdersByClass) {
  Rng rng(2);
  const Tensor rows = random_tensor({5, 4}, rng);
  const auto c = per_class_correlation(JacobianBatch{rows, {3, 1, 3, 7, 1}});
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].class_id, 1);
  EXPECT_EQ(c[1].class_id, 3);
  EXPECT_EQ(c[0].size(), 2u);
}

TEST(Correlation, DegenerateRowIsMarked) {
  const auto c = per_class_correlation(jac_of(3, 3, {1, 2, 3, 5, 5, 5, 3, 1, 2}, {0, 0, 0}));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_TRUE(std::isnan(c[0].sigma.at(0, 1)));
  EXPECT_TRUE(std::isnan(c[0].sigma.at(2, 1)));
  EXPECT_TRUE(std::isfinite(c[0].sigma.at(0, 2)));
}

TEST(Correlation, InvariantToWithinClassReorder) {
  Rng rng(3);
  const Tensor rows = random_tensor({4, 6}, rng);
  const std::vector<std::size_t> perm{2, 1, 3, 0};
  const auto a = per_class_correlation(JacobianBatch{rows, {0, 0, 0, 0}});
  const auto b = per_class_correlation(JacobianBatch{permute_rows(rows, perm), {0, 0, 0, 0}});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(b[0].sigma.at(i, j), a[0].sigma.at(perm[i], perm[j]), 1e-14);
}

TEST(EvalMatrix, SingleEntry) {
  EXPECT_NEAR(eval_matrix(corr_of({1.0}), ProxyParams{}), 9.999950000398841e-06, 1e-18);
}

TEST(EvalMatrix, HalfCorrelated) {
  EXPECT_NEAR(eval_matrix(corr_of({1, 0.5, 0.5, 1}), ProxyParams{}), -0.6931171808099423, 1e-13);
}

TEST(EvalMatrix, AllZeros) {
  EXPECT_NEAR(eval_matrix(corr_of({0, 0, 0, 0}), ProxyParams{}), -23.025850929940457, 1e-12);
}

TEST(EvalMatrix, NonFinitePropagates) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_TRUE(std::isnan(eval_matrix(corr_of({1, nan, nan, 1}), ProxyParams{})));
}

TEST(EvalMatrix, SymmetricPermutationInvariance) {
  const std::vector<double> m{1, 0.2, -0.7, 0.2, 1, 0.4, -0.7, 0.4, 1};
  const std::vector<std::size_t> p{2, 0, 1};
  std::vector<double> pm(9);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) pm[i * 3 + j] = m[p[i] * 3 + p[j]];
  EXPECT_NEAR(eval_matrix(corr_of(m), ProxyParams{}), eval_matrix(corr_of(pm), ProxyParams{}), 1e-14);
}

TEST(Score, SingleClass) {
  const std::vector<double> e{-5};
  EXPECT_DOUBLE_EQ(score(e, 1, ProxyParams{}).value(), 5.0);
}

TEST(Score, SumBranch) {
  const std::vector<double> e{-1, -3};
  EXPECT_DOUBLE_EQ(score(e, 2, ProxyParams{}).value(), 4.0);
}

TEST(Score, PairwiseBranch) {
  const std::vector<double> e{1, 2, 4};
  EXPECT_DOUBLE_EQ(score(e, 3, ProxyParams{1e-5, 2}).value(), 2.0);
}

TEST(Score, EmptyIsSentinel) {
  const ProxyScore s = score({}, 3, ProxyParams{});
  EXPECT_TRUE(s.is_sentinel());
  EXPECT_EQ(s.value(), -kInf);
}

TEST(Score, NonFiniteIsSentinel) {
  const std::vector<double> e{1, std::numeric_limits<double>::quiet_NaN()};
  EXPECT_TRUE(score(e, 2, ProxyParams{}).is_sentinel());
}

TEST(Score, MonotoneInMagnitude) {
  std::vector<double> e{-1, -2, -3};
  double prev = score(e, 3, ProxyParams{}).value();
  for (int step = 0; step < 5; ++step) {
    e[1] -= 0.5;
    const double now = score(e, 3, ProxyParams{}).value();
    EXPECT_GE(now, prev);
    prev = now;
  }
}

TEST(Score, SentinelRanksBelowEveryFiniteScore) {
  const ProxyScore worst = ProxyScore::worst();
  for (double v : {-1e300, -1.0, 0.0, 1e300}) {
    const ProxyScore finite(v, {});
    EXPECT_TRUE(worst < finite);
    EXPECT_FALSE(finite < worst);
  }
}

TEST(ScoreArch, ZeroizeIsSentinel) {
  const SkeletonConfig cfg = tiny_skeleton();
  Rng data(4);
  const Tensor x = random_batch(cfg, 6, data);
  const std::vector<Label> labels{0, 1, 2, 0, 1, 2};
  Rng init(5);
  EXPECT_TRUE(score_arch(ArchEncoding{}, x, labels, cfg, ProxyParams{}, init).is_sentinel());
}

TEST(ScoreArch, NoQualifyingClassIsSentinel) {
  const SkeletonConfig cfg = tiny_skeleton();
  Rng data(6);
  const Tensor x = random_batch(cfg, 3, data);
  const std::vector<Label> labels{0, 1, 2};
  Rng init(7);
  EXPECT_TRUE(score_arch(gea::testing::uniform_arch(OpKind::conv3x3), x, labels, cfg, ProxyParams{}, init)
                  .is_sentinel());
}

TEST(ScoreArch, Deterministic) {
  const SkeletonConfig cfg = tiny_skeleton();
  Rng data(8);
  const Tensor x = random_batch(cfg, 6, data);
  const std::vector<Label> labels{0, 1, 2, 0, 1, 2};
  const ArchEncoding arch = gea::testing::uniform_arch(OpKind::conv3x3);
  Rng a(9), b(9);
  const ProxyScore sa = score_arch(arch, x, labels, cfg, ProxyParams{}, a);
  const ProxyScore sb = score_arch(arch, x, labels, cfg, ProxyParams{}, b);
  EXPECT_EQ(sa, sb);
  EXPECT_FALSE(sa.is_sentinel());
  EXPECT_EQ(sa.per_class().size(), 3u);
}

TEST(ScoreArch, MatchesReferenceImplementation) {
  const SkeletonConfig cfg = tiny_skeleton();
  Rng data(10);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const ArchEncoding arch = random_arch(data);
    const Tensor x = random_batch(cfg, 8, data);
    const std::vector<Label> labels{0, 1, 2, 0, 1, 2, 0, 1};
    Rng init = data.split(static_cast<std::uint64_t>(trial));
    Rng init_copy = init;
    const ProxyScore got = score_arch(arch, x, labels, cfg, ProxyParams{}, init);
    const Network net = build_network(arch, cfg, init_copy);
    const auto want = oracles::reference_proxy(input_jacobian(net, x, labels).jacobian, labels, 1e-5, 100);
    ASSERT_EQ(got.is_sentinel(), !want.has_value()) << encode_str(arch);
    if (want) {
      EXPECT_NEAR(got.value(), *want, 1e-9 * std::abs(*want)) << encode_str(arch);
      ++checked;
    }
  }
  EXPECT_GT(checked, 10);
}

TEST(ScoreArch, PairwiseBranchAgainstReference) {
  Rng rng(11);
  const Tensor j = random_tensor({9, 10}, rng);
  const std::vector<Label> labels{0, 1, 2, 0, 1, 2, 0, 1, 3};
  const ProxyParams params{1e-5, 2};
  const ProxyScore got = score_jacobian(JacobianBatch{j, labels}, params);
  const auto want = oracles::reference_proxy(j, labels, 1e-5, 2);
  ASSERT_TRUE(want.has_value());
  EXPECT_NEAR(got.value(), *want, 1e-9 * std::abs(*want));
}

TEST(ScoreArch, InvariantUnderLabelPreservingPermutation) {
  const SkeletonConfig cfg = tiny_skeleton();
  Rng data(12);
  const Tensor x = random_batch(cfg, 6, data);
  const std::vector<Label> labels{0, 1, 2, 0, 1, 2};
  const std::vector<std::size_t> perm{4, 2, 0, 5, 1, 3};
  std::vector<Label> plabels;
  for (std::size_t p : perm) plabels.push_back(labels[p]);
  const ArchEncoding arch = decode_str(
      "|nor_conv_3x3~0|+|skip_connect~0|nor_conv_1x1~1|+|avg_pool_3x3~0|none~1|nor_conv_3x3~2|");
  Rng a(13), b(13);
  const double za = score_arch(arch, x, labels, cfg, ProxyParams{}, a).value();
  const double zb = score_arch(arch, permute_rows(x, perm), plabels, cfg, ProxyParams{}, b).value();
  EXPECT_NEAR(za, zb, 1e-9 * std::abs(za));
}

}  // namespace
