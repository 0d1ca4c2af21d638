#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gea/error.hpp"
#include "gea/oracle.hpp"
#include "gea/stats.hpp"
#include "support.hpp"

namespace {

using namespace gea;
using nlohmann::json;

json benchmark_json(const Benchmark& b) { return json::parse(dump_tabular(b)); }

const Benchmark& synthetic() {
  static const Benchmark b = [] {
    SyntheticSpec spec;
    spec.seed = 17;
    return gen_synthetic(spec);
  }();
  return b;
}

TEST(Tabular, RoundTrip) {
  const Benchmark& b = synthetic();
  const Benchmark back = parse_tabular(dump_tabular(b));
  EXPECT_EQ(back.dataset_name, b.dataset_name);
  EXPECT_EQ(back.records, b.records);
  EXPECT_EQ(back.synthetic_proxy, b.synthetic_proxy);
}

TEST(Tabular, RoundTripFileWithoutProxy) {
  Benchmark b = gea::testing::random_benchmark(3);
  b.synthetic_proxy.reset();
  const auto path = std::filesystem::temp_directory_path() / "gea_tabular_roundtrip.json";
  save_tabular(b, path);
  const Benchmark back = load_tabular(path);
  EXPECT_EQ(back.records, b.records);
  EXPECT_FALSE(back.synthetic_proxy.has_value());
  std::filesystem::remove(path);
}

TEST(Tabular, AcceptsShuffledRecords) {
  Benchmark b = gea::testing::random_benchmark(4);
  json doc = benchmark_json(b);
  auto& recs = doc["records"];
  std::reverse(recs.begin(), recs.end());
  EXPECT_EQ(parse_tabular(doc.dump()).records, b.records);
}

TEST(Tabular, MissingRecordIsIncomplete) {
  json doc = benchmark_json(gea::testing::random_benchmark(5));
  const std::string missing = doc["records"][42]["arch"];
  doc["records"].erase(42);
  ASSERT_EQ(doc["records"].size(), 15624u);
  try {
    parse_tabular(doc.dump());
    FAIL() << "accepted an incomplete benchmark";
  } catch (const IncompleteBenchmarkError& e) {
    EXPECT_NE(std::string(e.what()).find(missing), std::string::npos) << e.what();
  }
}

TEST(Tabular, DuplicateArchIsRejected) {
  json doc = benchmark_json(gea::testing::random_benchmark(6));
  doc["records"][7]["arch"] = doc["records"][8]["arch"];
  EXPECT_THROW(parse_tabular(doc.dump()), FormatError);
}

TEST(Tabular, MalformedInput) {
  EXPECT_THROW(parse_tabular("{\"space\": [1, 2"), ParseError);
  json doc = benchmark_json(gea::testing::random_benchmark(7));
  doc["records"][3].erase("val_acc");
  try {
    parse_tabular(doc.dump());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 3u);
  }
  doc = benchmark_json(gea::testing::random_benchmark(7));
  doc["records"][3]["arch"] = "|conv~0|";
  EXPECT_THROW(parse_tabular(doc.dump()), ParseError);
  doc = benchmark_json(gea::testing::random_benchmark(7));
  doc["records"][3]["val_acc"] = 140.0;
  EXPECT_THROW(parse_tabular(doc.dump()), FormatError);
  doc = benchmark_json(gea::testing::random_benchmark(7));
  doc["space"]["ops"][0] = "zero";
  EXPECT_THROW(parse_tabular(doc.dump()), FormatError);
  doc = benchmark_json(gea::testing::random_benchmark(7));
  doc["records"][0].erase("proxy");
  EXPECT_THROW(parse_tabular(doc.dump()), FormatError);
  EXPECT_THROW(load_tabular("/nonexistent/bench.json"), IoError);
}

TEST(Query, LookupIsPure) {
  const Benchmark& b = synthetic();
  const ArchEncoding a = decode_str("|nor_conv_3x3~0|+|skip_connect~0|none~1|+|skip_connect~0|nor_conv_1x1~1|avg_pool_3x3~2|");
  EXPECT_EQ(query(b, a), b.records[a.index()]);
  EXPECT_EQ(query(b, a), query(b, a));
}

TEST(Synthetic, Deterministic) {
  SyntheticSpec spec;
  spec.seed = 17;
  const Benchmark again = gen_synthetic(spec);
  EXPECT_EQ(again.records, synthetic().records);
  EXPECT_EQ(again.synthetic_proxy, synthetic().synthetic_proxy);
}

TEST(Synthetic, RecordRanges) {
  double lo = 100, hi = 0;
  for (const FitnessRecord& r : synthetic().records) {
    lo = std::min(lo, r.val_acc);
    hi = std::max(hi, r.val_acc);
    EXPECT_GE(r.test_acc, 0.0);
    EXPECT_LE(r.test_acc, 100.0);
    EXPECT_GE(r.train_time_s, 5.0);
    EXPECT_LE(r.train_time_s, 15.0);
  }
  EXPECT_DOUBLE_EQ(lo, 10.0);
  EXPECT_DOUBLE_EQ(hi, 95.0);
}

TEST(Synthetic, SeparableOptimum) {
  SyntheticSpec spec;
  spec.seed = 5;
  spec.noise_std = 0.0;
  spec.interaction_std = 0.0;
  const SyntheticLandscape land = make_landscape(spec);
  EXPECT_TRUE(land.interactions.empty());
  ArchEncoding expected;
  for (std::size_t e = 0; e < kNumEdges; ++e) {
    const auto& u = land.utilities[e];
    expected.edge_ops[e] = static_cast<OpKind>(std::max_element(u.begin(), u.end()) - u.begin());
  }
  EXPECT_EQ(best_of(gen_synthetic(spec)).first, expected);
}

TEST(Synthetic, InteractionsOnlyBetweenAdjacentEdges) {
  SyntheticSpec spec;
  const SyntheticLandscape land = make_landscape(spec);
  EXPECT_EQ(land.interactions.size(), 12u);
  for (const auto& it : land.interactions) {
    const Edge a = kEdges[it.edge_a], b = kEdges[it.edge_b];
    EXPECT_TRUE(a.from == b.from || a.to == b.to || a.to == b.from || a.from == b.to);
  }
}

TEST(Synthetic, ExactProxyHasUnitTau) {
  SyntheticSpec spec;
  spec.seed = 8;
  spec.target_proxy_tau = 1.0;
  const Benchmark b = gen_synthetic(spec);
  std::vector<double> val;
  for (const auto& r : b.records) val.push_back(r.val_acc);
  EXPECT_DOUBLE_EQ(kendall_tau(val, *b.synthetic_proxy), 1.0);
}

TEST(Synthetic, CalibratedTau) {
  std::vector<double> val;
  for (const auto& r : synthetic().records) val.push_back(r.val_acc);
  const double tau = kendall_tau(val, *synthetic().synthetic_proxy);
  EXPECT_GE(tau, 0.55);
  EXPECT_LE(tau, 0.65);
}

TEST(Synthetic, NegativeAndZeroTargets) {
  for (double target : {0.0, -0.4}) {
    SyntheticSpec spec;
    spec.seed = 9;
    spec.target_proxy_tau = target;
    const Benchmark b = gen_synthetic(spec);
    std::vector<double> val;
    for (const auto& r : b.records) val.push_back(r.val_acc);
    EXPECT_NEAR(kendall_tau(val, *b.synthetic_proxy), target, 0.05);
  }
}

TEST(Synthetic, UnreachableTargetFails) {
  SyntheticSpec spec;
  spec.target_proxy_tau = 1.5;
  EXPECT_THROW(gen_synthetic(spec), CalibrationError);
  spec.target_proxy_tau = 0.6;
  spec.noise_std = -1;
  EXPECT_THROW(gen_synthetic(spec), ConfigError);
}

TEST(BestOf, BeatsRandomSamples) {
  const Benchmark& b = synthetic();
  const auto [arch, rec] = best_of(b);
  EXPECT_EQ(b.records[arch.index()], rec);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) EXPECT_GE(rec.val_acc, b.query(random_arch(rng)).val_acc);
  // Independent fold over the records.
  const auto it = std::max_element(b.records.begin(), b.records.end(),
                                   [](const auto& x, const auto& y) { return x.val_acc < y.val_acc; });
  EXPECT_EQ(static_cast<std::size_t>(it - b.records.begin()), arch.index());
}

TEST(BestOf, ConstantLandscapeTiesToFirst) {
  Benchmark b = gea::testing::random_benchmark(1);
  for (auto& r : b.records) r.val_acc = 50.0;
  EXPECT_EQ(best_of(b).first, ArchEncoding{});
}

}  // namespace
