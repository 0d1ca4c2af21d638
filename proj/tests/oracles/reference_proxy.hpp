#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gea/network.hpp"
#include "gea/tensor.hpp"

namespace gea::oracles {

// Textbook Pearson correlation of two equal-length vectors.
double pearson(std::span<const double> a, std::span<const double> b);

// Sum of ln(|m_ij| + t) over a square matrix given as rows, divided by the
// matrix side.
double reference_eval_matrix(const std::vector<std::vector<double>>& m, double t);

// Aggregation of per-class scores: sum of magnitudes for at most tau classes,
// otherwise the mean-normalized sum of pairwise distances.
double reference_score(const std::vector<double>& e, std::size_t num_classes, double tau);

// Straight-line proxy evaluation from a Jacobian: per-class correlation,
// per-matrix log score, and final aggregation. nullopt means the worst score.
std::optional<double> reference_proxy(const Tensor& jacobian, std::span<const Label> labels,
                                      double t, double tau);

}  // namespace gea::oracles
