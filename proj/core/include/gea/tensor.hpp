#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gea {

// Dense row-major float64 tensor.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  // 2-D access.
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  // 4-D (N, C, H, W) access.
  double& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  double at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }

  Tensor reshaped(std::vector<std::size_t> shape) const;

  // Elements [begin, end) along axis 0.
  Tensor slice_rows(std::size_t begin, std::size_t end) const;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator*=(double s) noexcept;

  double sum() const noexcept;
  double frobenius_norm() const noexcept;
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::size_t shape_product(std::span<const std::size_t> shape) noexcept;

// Concatenate along axis 0; remaining dimensions must match.
Tensor concat_rows(const Tensor& a, const Tensor& b);

// Reorder axis-0 entries: out[i] = in[perm[i]].
Tensor permute_rows(const Tensor& in, std::span<const std::size_t> perm);

namespace kernels {

// x: (N, Cin, H, W), w: (Cout, Cin, K, K). Zero padding, no bias.
Tensor conv2d(const Tensor& x, const Tensor& w, std::size_t stride, std::size_t pad);
Tensor conv2d_grad_input(const Tensor& grad_out, const Tensor& w,
                         const std::vector<std::size_t>& input_shape, std::size_t stride,
                         std::size_t pad);

// Per-channel normalization with the batch's own mean and biased variance
// over (N, H, W). `normalized` receives y; `inv_std` one entry per channel.
Tensor batch_norm(const Tensor& x, double eps, std::vector<double>* inv_std = nullptr);
Tensor batch_norm_grad(const Tensor& grad_out, const Tensor& y, std::span<const double> inv_std);

Tensor relu(const Tensor& x);
Tensor relu_grad(const Tensor& grad_out, const Tensor& x);

// 3x3 window, stride 1, pad 1; padded cells are excluded from the average.
Tensor avg_pool3x3(const Tensor& x);
Tensor avg_pool3x3_grad(const Tensor& grad_out);

// (N, C, H, W) -> (N, C)
Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_grad(const Tensor& grad_out, std::size_t h, std::size_t w);

// x: (N, Cin), w: (Cout, Cin) -> (N, Cout)
Tensor dense(const Tensor& x, const Tensor& w);
Tensor dense_grad_input(const Tensor& grad_out, const Tensor& w);

}  // namespace kernels

}  // namespace gea
