#include <benchmark/benchmark.h>

#include <vector>

#include "gea/batch.hpp"
#include "gea/evolution.hpp"
#include "gea/network.hpp"
#include "gea/oracle.hpp"
#include "gea/stats.hpp"
#include "gea/zeroproxy.hpp"

namespace {

using namespace gea;

const ArchEncoding& conv_heavy() {
  static const ArchEncoding arch = decode_str(
      "|nor_conv_3x3~0|+|nor_conv_3x3~0|nor_conv_1x1~1|+|skip_connect~0|nor_conv_3x3~1|avg_pool_3x3~2|");
  return arch;
}

void BM_Forward(benchmark::State& state) {
  SkeletonConfig cfg;
  Rng rng(1);
  const Network net = build_network(conv_heavy(), cfg, rng);
  SyntheticBatchSpec spec;
  spec.batch_size = static_cast<std::size_t>(state.range(0));
  spec.num_classes = 1;
  const Batch batch = make_batch(spec);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(batch.images));
}
BENCHMARK(BM_Forward)->Arg(2)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_InputJacobian(benchmark::State& state) {
  SkeletonConfig cfg;
  Rng rng(2);
  const Network net = build_network(conv_heavy(), cfg, rng);
  const Batch batch = make_batch(SyntheticBatchSpec{});
  for (auto _ : state) benchmark::DoNotOptimize(input_jacobian(net, batch.images, batch.labels));
}
BENCHMARK(BM_InputJacobian)->Unit(benchmark::kMillisecond);

// Network construction plus Jacobian plus score; the per-child cost of a guided cycle.
void BM_ScoreArch(benchmark::State& state) {
  SkeletonConfig cfg;
  const Batch batch = make_batch(SyntheticBatchSpec{});
  Rng arch_rng(3);
  for (auto _ : state) {
    Rng rng = arch_rng.split(state.iterations());
    benchmark::DoNotOptimize(score_arch(random_arch(rng), batch.images, batch.labels, cfg, ProxyParams{}, rng));
  }
}
BENCHMARK(BM_ScoreArch)->Unit(benchmark::kMillisecond);

void BM_KendallTau(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = x[i] + rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(kendall_tau(x, y));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_KendallTau)->Arg(1 << 10)->Arg(kSpaceSize)->Complexity(benchmark::oNLogN);

void BM_TableSearch(benchmark::State& state) {
  const Benchmark bench = gen_synthetic(SyntheticSpec{});
  const TableScorer scorer(bench);
  const SearchConfig cfg;
  std::uint64_t run = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_search(cfg, bench, &scorer, Rng(run++)));
}
BENCHMARK(BM_TableSearch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
