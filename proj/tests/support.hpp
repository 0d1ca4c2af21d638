#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "gea/network.hpp"
#include "gea/rng.hpp"
#include "gea/tensor.hpp"

namespace gea::testing {

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = scale * rng.normal();
  return t;
}

inline SkeletonConfig tiny_skeleton() {
  SkeletonConfig cfg;
  cfg.input_channels = 2;
  cfg.input_hw = 4;
  cfg.stem_channels = 3;
  cfg.num_stages = 2;
  cfg.num_classes = 3;
  return cfg;
}

inline Tensor random_batch(const SkeletonConfig& cfg, std::size_t n, Rng& rng) {
  return random_tensor({n, cfg.input_channels, cfg.input_hw, cfg.input_hw}, rng);
}

inline double relative_frobenius(const Tensor& approx, const Tensor& exact) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    diff += (approx[i] - exact[i]) * (approx[i] - exact[i]);
    ref += exact[i] * exact[i];
  }
  return std::sqrt(diff) / std::sqrt(ref);
}

inline ArchEncoding uniform_arch(OpKind op) {
  ArchEncoding a;
  a.edge_ops.fill(op);
  return a;
}

}  // namespace gea::testing

#include "gea/oracle.hpp"

namespace gea::testing {

// Cheap benchmark with random accuracies and the fitness itself as proxy map.
inline Benchmark random_benchmark(std::uint64_t seed) {
  Benchmark b;
  b.dataset_name = "random";
  Rng rng(seed);
  b.records.resize(kSpaceSize);
  std::vector<double> proxy(kSpaceSize);
  for (std::size_t i = 0; i < kSpaceSize; ++i) {
    b.records[i].val_acc = 50.0 + 40.0 * rng.uniform();
    b.records[i].test_acc = b.records[i].val_acc - 1.0;
    b.records[i].train_time_s = 5.0 + 10.0 * rng.uniform();
    proxy[i] = b.records[i].val_acc;
  }
  b.synthetic_proxy = std::move(proxy);
  return b;
}

}  // namespace gea::testing
