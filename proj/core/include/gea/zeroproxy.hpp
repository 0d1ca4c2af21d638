#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "gea/cellspace.hpp"
#include "gea/network.hpp"
#include "gea/rng.hpp"
#include "gea/tensor.hpp"

namespace gea {

struct ProxyParams {
  double t = 1e-5;   // smoothing constant inside the log
  double tau = 100;  // class-count threshold between the two aggregation rules

  void validate() const;
};

// Pearson correlation matrix of the Jacobian rows belonging to one class.
struct ClassCorr {
  Label class_id = 0;
  Tensor sigma;  // (n_k, n_k)

  std::size_t size() const { return sigma.dim(0); }
};

// Architecture score. Higher is better; the worst-sentinel (degenerate or
// non-finite evaluation) ranks below every finite score.
class ProxyScore {
 public:
  ProxyScore() = default;
  ProxyScore(double value, std::vector<double> per_class)
      : value_(value), per_class_(std::move(per_class)) {}

  static ProxyScore worst() { return ProxyScore(); }

  bool is_sentinel() const noexcept { return sentinel_(); }
  // -inf for the sentinel so that plain `<` gives the ranking order.
  double value() const noexcept { return value_; }
  const std::vector<double>& per_class() const noexcept { return per_class_; }

  friend bool operator==(const ProxyScore& a, const ProxyScore& b) {
    return a.value_ == b.value_ && a.per_class_ == b.per_class_;
  }
  friend std::partial_ordering operator<=>(const ProxyScore& a, const ProxyScore& b) {
    return a.value_ <=> b.value_;
  }

 private:
  bool sentinel_() const noexcept { return value_ == -std::numeric_limits<double>::infinity(); }

  double value_ = -std::numeric_limits<double>::infinity();
  std::vector<double> per_class_;
};

// Rows whose standard deviation across D is below this are degenerate.
inline constexpr double kDegenerateRowStd = 1e-12;

// Groups Jacobian rows by label and correlates rows within each class with
// at least two samples, in ascending class order. Off-diagonal entries that
// involve a degenerate row are NaN.
std::vector<ClassCorr> per_class_correlation(const JacobianBatch& jac);

// Sum over all entries of ln(|sigma_ij| + t), divided by sqrt(n_k^2).
double eval_matrix(const ClassCorr& corr, const ProxyParams& params);

// If num_classes <= tau, the sum of |e|; otherwise the sum of pairwise
// |e_i - e_j| over i < j divided by the number of entries in e. Empty e or any
// non-finite value gives the sentinel.
ProxyScore score(std::span<const double> e_values, std::size_t num_classes, const ProxyParams& params);

// build_network -> input_jacobian -> per_class_correlation -> eval_matrix ->
// score. `rng` seeds the network weights.
ProxyScore score_arch(const ArchEncoding& arch, const Tensor& batch, std::span<const Label> labels,
                      const SkeletonConfig& cfg, const ProxyParams& params, Rng& rng);

// Score from an already computed Jacobian.
ProxyScore score_jacobian(const JacobianBatch& jac, const ProxyParams& params);

}  // namespace gea
