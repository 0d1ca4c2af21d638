#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gea/cellspace.hpp"
#include "gea/rng.hpp"
#include "gea/tensor.hpp"

namespace gea {

using Label = std::int32_t;

struct SkeletonConfig {
  std::size_t input_channels = 3;
  std::size_t input_hw = 16;
  std::size_t stem_channels = 8;
  std::size_t cells_per_stage = 1;
  std::size_t num_stages = 3;
  std::size_t num_classes = 10;
  double bn_eps = 1e-5;

  // Throws ConfigError.
  void validate() const;
  std::size_t input_dim() const noexcept { return input_channels * input_hw * input_hw; }
};

// N x D input-Jacobian rows with their class labels.
struct JacobianBatch {
  Tensor jacobian;  // (N, D)
  std::vector<Label> labels;

  std::size_t rows() const { return jacobian.dim(0); }
  std::size_t cols() const { return jacobian.dim(1); }
};

// Randomly initialized, never-trained cell network.
//
// Layout: stem conv3x3 + BN, then `num_stages` stages of `cells_per_stage`
// cells; stages after the first open with ReLU -> conv3x3/stride 2 (channels
// doubled) -> BN. Head: ReLU -> global average pool -> dense classifier.
// BN always normalizes with the current batch's statistics and has no affine
// parameters. Weights are He-normal, std sqrt(2 / fan_in), with no biases.
class Network {
 public:
  static Network build(const ArchEncoding& arch, const SkeletonConfig& cfg, Rng& rng);

  const ArchEncoding& arch() const noexcept { return arch_; }
  const SkeletonConfig& config() const noexcept { return cfg_; }

  // (N, Cin, H, W) -> (N, num_classes). Requires N >= 2.
  Tensor forward(const Tensor& batch) const;

  // Sum of all logits over all samples and classes. With `pattern`, also
  // appends the on/off state of every input-dependent ReLU unit.
  double output_sum(const Tensor& batch, std::vector<bool>* pattern = nullptr) const;

  // d(output_sum)/d(batch), same shape as the batch.
  Tensor output_sum_gradient(const Tensor& batch) const;

  // Smallest |pre-activation| over every ReLU whose input depends on the
  // batch; +inf when there is none.
  double min_relu_margin(const Tensor& batch) const;

  std::vector<bool> relu_pattern(const Tensor& batch) const;

  // Runs one cell in isolation (no batch-size requirement beyond BN's).
  Tensor run_cell(std::size_t stage, std::size_t cell, const Tensor& input) const;

  // Every parameter in initialization order.
  std::vector<double> flat_parameters() const;
  std::size_t num_stages() const noexcept { return stages_.size(); }
  std::size_t stage_channels(std::size_t stage) const { return stages_.at(stage).channels; }

 private:
  struct Cell {
    std::array<Tensor, kNumEdges> edge_weights;  // empty for parameter-free ops
  };
  struct Stage {
    std::size_t channels = 0;
    Tensor reduction;  // empty for the first stage
    std::vector<Cell> cells;
  };

  friend class NetworkTracer;

  Network() = default;
  void check_batch(const Tensor& batch) const;

  ArchEncoding arch_;
  SkeletonConfig cfg_;
  Tensor stem_;
  std::vector<Stage> stages_;
  Tensor classifier_;
};

Network build_network(const ArchEncoding& arch, const SkeletonConfig& cfg, Rng& rng);

Tensor forward(const Network& net, const Tensor& batch);

// Row i is the gradient of the total logit sum w.r.t. sample i, flattened to
// D = C * H * W. Non-finite entries are passed through unchanged.
JacobianBatch input_jacobian(const Network& net, const Tensor& batch, std::span<const Label> labels);

// Central differences of output_sum, entry by entry. Returns (N, D). With
// `kink_crossings`, counts the entries whose stencil switched any ReLU unit
// relative to the unperturbed batch; those entries are not derivatives.
// `stop_at_kink` abandons the sweep at the first crossing.
Tensor finite_diff_jacobian(const Network& net, const Tensor& batch, double step,
                            std::size_t* kink_crossings = nullptr, bool stop_at_kink = false);

}  // namespace gea
