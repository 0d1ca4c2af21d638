#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gea/network.hpp"
#include "gea/tensor.hpp"

namespace gea {

struct Batch {
  Tensor images;  // (N, C, H, W)
  std::vector<Label> labels;
};

// Stand-in for a dataset minibatch: each class is a fixed random template
// image, and each sample is its class template plus Gaussian noise. Labels
// are assigned round-robin (sample i has label i % num_classes).
struct SyntheticBatchSpec {
  std::size_t num_classes = 10;
  std::size_t batch_size = 32;
  std::size_t channels = 3;
  std::size_t hw = 16;
  double noise_scale = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

Batch make_batch(const SyntheticBatchSpec& spec);

inline constexpr std::size_t kCifarRecordBytes = 3073;
inline constexpr std::size_t kCifarHw = 32;

// First `count` records of a CIFAR-10 binary file (1 label byte + 3072
// channel-major pixel bytes), pixels scaled to [0, 1]. Classes with a single
// sample are dropped and reported through `warnings`.
Batch load_raw_batch(const std::filesystem::path& path, std::size_t count,
                     std::vector<std::string>* warnings = nullptr);

// Same, from an in-memory buffer.
Batch parse_raw_batch(const std::vector<std::uint8_t>& bytes, std::size_t count,
                      std::vector<std::string>* warnings = nullptr);

}  // namespace gea
