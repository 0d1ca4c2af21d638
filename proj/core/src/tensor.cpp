#include "gea/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "gea/error.hpp"

namespace gea {

std::size_t shape_product(std::span<const std::size_t> shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(shape_product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_product(shape_) != data_.size()) {
    throw ShapeError(fmt::format("shape {} does not hold {} elements", shape_, data_.size()));
  }
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::slice_rows(std::size_t begin, std::size_t end) const {
  if (shape_.empty() || begin > end || end > shape_[0]) {
    throw ShapeError(fmt::format("row slice [{}, {}) invalid for shape {}", begin, end, shape_));
  }
  const std::size_t stride = data_.size() / shape_[0];
  std::vector<std::size_t> shape = shape_;
  shape[0] = end - begin;
  return Tensor(std::move(shape),
                std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(begin * stride),
                                    data_.begin() + static_cast<std::ptrdiff_t>(end * stride)));
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.shape_ != shape_) {
    throw ShapeError(fmt::format("cannot add shape {} to {}", other.shape_, shape_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

double Tensor::sum() const noexcept { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double Tensor::frobenius_norm() const noexcept {
  double acc = 0.0;
  for (double v : data_) acc += v * v;
  return std::sqrt(acc);
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  if (a.rank() == 0 || a.rank() != b.rank() ||
      !std::equal(a.shape().begin() + 1, a.shape().end(), b.shape().begin() + 1)) {
    throw ShapeError(fmt::format("cannot concatenate {} and {}", a.shape(), b.shape()));
  }
  std::vector<std::size_t> shape = a.shape();
  shape[0] += b.dim(0);
  std::vector<double> data(a.data().begin(), a.data().end());
  data.insert(data.end(), b.data().begin(), b.data().end());
  return Tensor(std::move(shape), std::move(data));
}

Tensor permute_rows(const Tensor& in, std::span<const std::size_t> perm) {
  if (in.rank() == 0 || perm.size() != in.dim(0)) {
    throw ShapeError("permutation length does not match leading dimension");
  }
  Tensor out(in.shape());
  const std::size_t stride = in.size() / in.dim(0);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    std::copy_n(in.data().begin() + static_cast<std::ptrdiff_t>(perm[i] * stride), stride,
                out.data().begin() + static_cast<std::ptrdiff_t>(i * stride));
  }
  return out;
}

namespace kernels {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(fmt::format("{} expects a rank-{} tensor, got shape {}", what, rank, t.shape()));
  }
}

std::size_t conv_out_size(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Patch matrix of one sample: row (ci, kh, kw), column (r, c) holds the input
// pixel under that kernel tap, or zero in the padding.
struct ConvGeometry {
  std::size_t cin, h, w, k, stride, pad, oh, ow;
  std::size_t taps() const { return cin * k * k; }
  std::size_t pixels() const { return oh * ow; }
};

void im2col(const double* x, const ConvGeometry& g, double* col) {
  for (std::size_t ci = 0; ci < g.cin; ++ci) {
    for (std::size_t kh = 0; kh < g.k; ++kh) {
      for (std::size_t kw = 0; kw < g.k; ++kw) {
        double* row = col + ((ci * g.k + kh) * g.k + kw) * g.pixels();
        for (std::size_t r = 0; r < g.oh; ++r) {
          const std::size_t ih = r * g.stride + kh;
          for (std::size_t c = 0; c < g.ow; ++c) {
            const std::size_t iw = c * g.stride + kw;
            const bool inside = ih >= g.pad && ih < g.h + g.pad && iw >= g.pad && iw < g.w + g.pad;
            row[r * g.ow + c] = inside ? x[(ci * g.h + ih - g.pad) * g.w + iw - g.pad] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const double* col, const ConvGeometry& g, double* x) {
  for (std::size_t ci = 0; ci < g.cin; ++ci) {
    for (std::size_t kh = 0; kh < g.k; ++kh) {
      for (std::size_t kw = 0; kw < g.k; ++kw) {
        const double* row = col + ((ci * g.k + kh) * g.k + kw) * g.pixels();
        for (std::size_t r = 0; r < g.oh; ++r) {
          const std::size_t ih = r * g.stride + kh;
          if (ih < g.pad || ih >= g.h + g.pad) continue;
          for (std::size_t c = 0; c < g.ow; ++c) {
            const std::size_t iw = c * g.stride + kw;
            if (iw < g.pad || iw >= g.w + g.pad) continue;
            x[(ci * g.h + ih - g.pad) * g.w + iw - g.pad] += row[r * g.ow + c];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, std::size_t stride, std::size_t pad) {
  require_rank(x, 4, "conv2d input");
  require_rank(w, 4, "conv2d weight");
  const std::size_t n = x.dim(0), cout = w.dim(0), k = w.dim(2);
  if (w.dim(1) != x.dim(1)) {
    throw ShapeError(fmt::format("conv2d weight {} incompatible with input {}", w.shape(), x.shape()));
  }
  const ConvGeometry g{x.dim(1), x.dim(2), x.dim(3), k, stride, pad,
                       conv_out_size(x.dim(2), k, stride, pad), conv_out_size(x.dim(3), k, stride, pad)};
  Tensor y({n, cout, g.oh, g.ow});
  const std::size_t taps = g.taps(), pixels = g.pixels();
  std::vector<double> col(taps * pixels);
  const double* wd = w.data().data();
  for (std::size_t b = 0; b < n; ++b) {
    im2col(x.data().data() + b * g.cin * g.h * g.w, g, col.data());
    for (std::size_t co = 0; co < cout; ++co) {
      double* out = y.data().data() + (b * cout + co) * pixels;
      const double* wrow = wd + co * taps;
      std::size_t j = 0;
      for (; j + 4 <= taps; j += 4) {
        const double w0 = wrow[j], w1 = wrow[j + 1], w2 = wrow[j + 2], w3 = wrow[j + 3];
        const double* s0 = col.data() + j * pixels;
        const double *s1 = s0 + pixels, *s2 = s1 + pixels, *s3 = s2 + pixels;
        for (std::size_t p = 0; p < pixels; ++p) out[p] += w0 * s0[p] + w1 * s1[p] + w2 * s2[p] + w3 * s3[p];
      }
      for (; j < taps; ++j) {
        const double wv = wrow[j];
        const double* src = col.data() + j * pixels;
        for (std::size_t p = 0; p < pixels; ++p) out[p] += wv * src[p];
      }
    }
  }
  return y;
}

Tensor conv2d_grad_input(const Tensor& grad_out, const Tensor& w,
                         const std::vector<std::size_t>& input_shape, std::size_t stride,
                         std::size_t pad) {
  require_rank(grad_out, 4, "conv2d gradient");
  const std::size_t n = input_shape[0], cout = w.dim(0), k = w.dim(2);
  const ConvGeometry g{input_shape[1], input_shape[2], input_shape[3], k, stride, pad,
                       grad_out.dim(2), grad_out.dim(3)};
  Tensor gx(input_shape);
  const std::size_t taps = g.taps(), pixels = g.pixels();
  std::vector<double> gcol(taps * pixels);
  const double* wd = w.data().data();
  for (std::size_t b = 0; b < n; ++b) {
    std::fill(gcol.begin(), gcol.end(), 0.0);
    for (std::size_t co = 0; co < cout; ++co) {
      const double* go = grad_out.data().data() + (b * cout + co) * pixels;
      for (std::size_t j = 0; j < taps; ++j) {
        const double wv = wd[co * taps + j];
        double* dst = gcol.data() + j * pixels;
        for (std::size_t p = 0; p < pixels; ++p) dst[p] += wv * go[p];
      }
    }
    col2im_add(gcol.data(), g, gx.data().data() + b * g.cin * g.h * g.w);
  }
  return gx;
}

Tensor batch_norm(const Tensor& x, double eps, std::vector<double>* inv_std) {
  require_rank(x, 4, "batch_norm");
  const std::size_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  const double count = static_cast<double>(n * plane);
  Tensor y(x.shape());
  if (inv_std) inv_std->assign(c, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double mean = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const double* p = x.data().data() + (b * c + ch) * plane;
      for (std::size_t i = 0; i < plane; ++i) mean += p[i];
    }
    mean /= count;
    double var = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const double* p = x.data().data() + (b * c + ch) * plane;
      for (std::size_t i = 0; i < plane; ++i) var += (p[i] - mean) * (p[i] - mean);
    }
    var /= count;
    const double is = 1.0 / std::sqrt(var + eps);
    if (inv_std) (*inv_std)[ch] = is;
    for (std::size_t b = 0; b < n; ++b) {
      const double* p = x.data().data() + (b * c + ch) * plane;
      double* q = y.data().data() + (b * c + ch) * plane;
      for (std::size_t i = 0; i < plane; ++i) q[i] = (p[i] - mean) * is;
    }
  }
  return y;
}

Tensor batch_norm_grad(const Tensor& grad_out, const Tensor& y, std::span<const double> inv_std) {
  // dx = inv_std * (g - mean(g) - y * mean(g * y)), means over (N, H, W).
  const std::size_t n = y.dim(0), c = y.dim(1), plane = y.dim(2) * y.dim(3);
  const double count = static_cast<double>(n * plane);
  Tensor gx(y.shape());
  for (std::size_t ch = 0; ch < c; ++ch) {
    double mean_g = 0.0, mean_gy = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * c + ch) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        mean_g += grad_out[off + i];
        mean_gy += grad_out[off + i] * y[off + i];
      }
    }
    mean_g /= count;
    mean_gy /= count;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * c + ch) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        gx[off + i] = inv_std[ch] * (grad_out[off + i] - mean_g - y[off + i] * mean_gy);
      }
    }
  }
  return gx;
}

Tensor relu(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return y;
}

Tensor relu_grad(const Tensor& grad_out, const Tensor& x) {
  Tensor gx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) gx[i] = x[i] > 0.0 ? grad_out[i] : 0.0;
  return gx;
}

namespace {

std::size_t window_count(std::size_t i, std::size_t extent) {
  return (i > 0 ? 1u : 0u) + 1u + (i + 1 < extent ? 1u : 0u);
}

}  // namespace

Tensor avg_pool3x3(const Tensor& x) {
  require_rank(x, 4, "avg_pool3x3");
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  Tensor y(x.shape());
  for (std::size_t p = 0; p < planes; ++p) {
    const double* in = x.data().data() + p * h * w;
    double* out = y.data().data() + p * h * w;
    for (std::size_t r = 0; r < h; ++r) {
      const std::size_t r0 = r > 0 ? r - 1 : 0, r1 = std::min(h, r + 2);
      for (std::size_t c = 0; c < w; ++c) {
        const std::size_t c0 = c > 0 ? c - 1 : 0, c1 = std::min(w, c + 2);
        double acc = 0.0;
        for (std::size_t i = r0; i < r1; ++i)
          for (std::size_t j = c0; j < c1; ++j) acc += in[i * w + j];
        out[r * w + c] = acc / static_cast<double>(window_count(r, h) * window_count(c, w));
      }
    }
  }
  return y;
}

Tensor avg_pool3x3_grad(const Tensor& grad_out) {
  const std::size_t planes = grad_out.dim(0) * grad_out.dim(1), h = grad_out.dim(2),
                    w = grad_out.dim(3);
  Tensor gx(grad_out.shape());
  for (std::size_t p = 0; p < planes; ++p) {
    const double* go = grad_out.data().data() + p * h * w;
    double* gi = gx.data().data() + p * h * w;
    for (std::size_t r = 0; r < h; ++r) {
      const std::size_t r0 = r > 0 ? r - 1 : 0, r1 = std::min(h, r + 2);
      for (std::size_t c = 0; c < w; ++c) {
        const std::size_t c0 = c > 0 ? c - 1 : 0, c1 = std::min(w, c + 2);
        const double g =
            go[r * w + c] / static_cast<double>(window_count(r, h) * window_count(c, w));
        for (std::size_t i = r0; i < r1; ++i)
          for (std::size_t j = c0; j < c1; ++j) gi[i * w + j] += g;
      }
    }
  }
  return gx;
}

Tensor global_avg_pool(const Tensor& x) {
  require_rank(x, 4, "global_avg_pool");
  const std::size_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  Tensor y({n, c});
  for (std::size_t i = 0; i < n * c; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < plane; ++j) acc += x[i * plane + j];
    y[i] = acc / static_cast<double>(plane);
  }
  return y;
}

Tensor global_avg_pool_grad(const Tensor& grad_out, std::size_t h, std::size_t w) {
  const std::size_t n = grad_out.dim(0), c = grad_out.dim(1), plane = h * w;
  Tensor gx({n, c, h, w});
  for (std::size_t i = 0; i < n * c; ++i) {
    const double g = grad_out[i] / static_cast<double>(plane);
    for (std::size_t j = 0; j < plane; ++j) gx[i * plane + j] = g;
  }
  return gx;
}

Tensor dense(const Tensor& x, const Tensor& w) {
  require_rank(x, 2, "dense input");
  require_rank(w, 2, "dense weight");
  if (w.dim(1) != x.dim(1)) {
    throw ShapeError(fmt::format("dense weight {} incompatible with input {}", w.shape(), x.shape()));
  }
  const std::size_t n = x.dim(0), cin = x.dim(1), cout = w.dim(0);
  Tensor y({n, cout});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t o = 0; o < cout; ++o) {
      double acc = 0.0;
      for (std::size_t i = 0; i < cin; ++i) acc += w.at(o, i) * x.at(b, i);
      y.at(b, o) = acc;
    }
  return y;
}

Tensor dense_grad_input(const Tensor& grad_out, const Tensor& w) {
  const std::size_t n = grad_out.dim(0), cout = w.dim(0), cin = w.dim(1);
  Tensor gx({n, cin});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t o = 0; o < cout; ++o) {
      const double g = grad_out.at(b, o);
      for (std::size_t i = 0; i < cin; ++i) gx.at(b, i) += g * w.at(o, i);
    }
  return gx;
}

}  // namespace kernels

}  // namespace gea
