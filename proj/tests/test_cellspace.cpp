#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <set>
#include <unordered_set>

#include "gea/cellspace.hpp"
#include "gea/error.hpp"

namespace {

using namespace gea;

ArchEncoding make(std::array<OpKind, kNumEdges> ops) { return ArchEncoding{ops}; }

TEST(CellSpace, SpaceSize) {
  EXPECT_EQ(SpaceDescriptor{}.size(), 15625u);
  EXPECT_EQ(kNumOps, 5u);
}

TEST(CellSpace, EnumerateAllIsLexicographicAndDistinct) {
  const auto all = enumerate_all();
  ASSERT_EQ(all.size(), 15625u);
  EXPECT_EQ(all.front(), ArchEncoding{});
  for (OpKind op : all.front().edge_ops) EXPECT_EQ(op, OpKind::zeroize);
  std::set<ArchEncoding> unique(all.begin(), all.end());
  EXPECT_EQ(unique.size(), 15625u);
  for (std::size_t i = 1; i < all.size(); ++i) ASSERT_LT(all[i - 1], all[i]);
  for (std::size_t i = 0; i < all.size(); ++i) ASSERT_EQ(all[i].index(), i);
}

TEST(CellSpace, RandomArchIsDeterministic) {
  Rng a(42), b(42);
  EXPECT_EQ(random_arch(a), random_arch(b));
}

TEST(CellSpace, RandomArchReachesWholeSpace) {
  std::unordered_set<ArchEncoding> seen;
  for (std::uint64_t seed = 0; seen.size() < kSpaceSize && seed < 400000; ++seed) {
    Rng r(seed);
    seen.insert(random_arch(r));
  }
  EXPECT_EQ(seen.size(), kSpaceSize);
}

TEST(CellSpace, RandomArchMarginalsAreUniform) {
  const int n = 1000000;
  std::array<std::array<int, kNumOps>, kNumEdges> counts{};
  Rng r(2024);
  for (int i = 0; i < n; ++i) {
    const ArchEncoding a = random_arch(r);
    for (std::size_t e = 0; e < kNumEdges; ++e) ++counts[e][static_cast<std::size_t>(a.edge_ops[e])];
  }
  const double expected = n * 0.2;
  const double sigma = std::sqrt(n * 0.2 * 0.8);
  double chi2_max = 0.0;
  for (const auto& edge : counts) {
    double chi2 = 0.0;
    for (int c : edge) {
      EXPECT_LT(std::abs(c - expected), 4.0 * sigma);
      chi2 += (c - expected) * (c - expected) / expected;
    }
    chi2_max = std::max(chi2_max, chi2);
  }
  // chi-square with 4 degrees of freedom, p = 0.001 critical value.
  EXPECT_LT(chi2_max, 18.467);
}

TEST(CellSpace, MutateFigureExample) {
  // skip_connect on edge (0->1) becomes conv3x3. Among the ops other than
  // skip_connect {zeroize, conv1x1, conv3x3, avgpool3x3}, conv3x3 is choice 2.
  const ArchEncoding parent = make({OpKind::skip_connect, OpKind::conv1x1, OpKind::zeroize,
                                    OpKind::avgpool3x3, OpKind::skip_connect, OpKind::conv3x3});
  const ArchEncoding child = mutate_with(parent, 0, 2);
  ArchEncoding expected = parent;
  expected.edge_ops[0] = OpKind::conv3x3;
  EXPECT_EQ(child, expected);
}

TEST(CellSpace, MutateIsHammingOne) {
  Rng seeds(99);
  for (int i = 0; i < 20000; ++i) {
    const ArchEncoding parent = random_arch(seeds);
    const ArchEncoding child = mutate(parent, seeds);
    ASSERT_EQ(hamming_distance(parent, child), 1u);
    ASSERT_NE(parent, child);
  }
}

TEST(CellSpace, MutateCoversTwentyFourChildrenUniformly) {
  const ArchEncoding parent = make({OpKind::conv3x3, OpKind::skip_connect, OpKind::zeroize,
                                    OpKind::skip_connect, OpKind::conv1x1, OpKind::avgpool3x3});
  const int n = 100000;
  std::map<ArchEncoding, int> counts;
  Rng r(31337);
  for (int i = 0; i < n; ++i) ++counts[mutate(parent, r)];
  ASSERT_EQ(counts.size(), 24u);
  const double p = 1.0 / 24.0;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (const auto& [child, c] : counts) {
    EXPECT_EQ(hamming_distance(parent, child), 1u);
    EXPECT_LT(std::abs(c - n * p), 4.0 * sigma);
  }
}

TEST(CellSpace, MutateWithRejectsBadArguments) {
  EXPECT_THROW(mutate_with(ArchEncoding{}, 6, 0), ConfigError);
  EXPECT_THROW(mutate_with(ArchEncoding{}, 0, 4), ConfigError);
}

TEST(CellSpace, EncodeAllZeroize) {
  EXPECT_EQ(encode_str(ArchEncoding{}), "|none~0|+|none~0|none~1|+|none~0|none~1|none~2|");
}

TEST(CellSpace, EncodeMixed) {
  const ArchEncoding a = make({OpKind::conv3x3, OpKind::skip_connect, OpKind::zeroize,
                               OpKind::skip_connect, OpKind::conv1x1, OpKind::avgpool3x3});
  EXPECT_EQ(encode_str(a),
            "|nor_conv_3x3~0|+|skip_connect~0|none~1|+|skip_connect~0|nor_conv_1x1~1|avg_pool_3x3~2|");
}

TEST(CellSpace, DecodeAllZeroize) {
  EXPECT_EQ(decode_str("|none~0|+|none~0|none~1|+|none~0|none~1|none~2|"), ArchEncoding{});
}

TEST(CellSpace, RoundTripWholeSpace) {
  for (const ArchEncoding& a : enumerate_all()) ASSERT_EQ(decode_str(encode_str(a)), a);
}

TEST(CellSpace, EdgeLookupByNodes) {
  const ArchEncoding a = make({OpKind::conv3x3, OpKind::skip_connect, OpKind::zeroize,
                               OpKind::skip_connect, OpKind::conv1x1, OpKind::avgpool3x3});
  EXPECT_EQ(a.op(2, 3), OpKind::avgpool3x3);
  EXPECT_EQ(a.op(1, 2), OpKind::zeroize);
  EXPECT_THROW(a.op(3, 1), ConfigError);
}

struct BadString {
  const char* text;
  const char* fragment;
  std::size_t position;
};

class DecodeErrors : public ::testing::TestWithParam<BadString> {};

TEST_P(DecodeErrors, ReportsTokenAndPosition) {
  const BadString& c = GetParam();
  try {
    decode_str(c.text);
    FAIL() << "accepted " << c.text;
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(c.fragment), std::string::npos) << e.what();
    EXPECT_EQ(e.position(), c.position) << e.what();
  }
}

INSTANTIATE_TEST_SUITE_P(
    CellSpace, DecodeErrors,
    ::testing::Values(
        BadString{"|bogus~0|+|none~0|none~1|+|none~0|none~1|none~2|", "unknown op name 'bogus'", 1},
        BadString{"|none~0|+|none~0|none~1|+|none~0|none~1|none~9|", "wrong group arity", 45},
        BadString{"|none~0|+|none~0|+|none~0|none~1|none~2|", "wrong group arity", 17},
        BadString{"|none~0|none~1|+|none~0|none~1|+|none~0|none~1|none~2|", "wrong group arity", 8},
        BadString{"none~0|+|none~0|none~1|+|none~0|none~1|none~2|", "malformed", 0},
        BadString{"|none~0|+|none~0|none~1|+|none~0|none~1|none~2|x", "trailing", 47},
        BadString{"", "malformed", 0}));

}  // namespace
