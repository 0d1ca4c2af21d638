#include "gea/zeroproxy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "gea/error.hpp"

namespace gea {

void ProxyParams::validate() const {
  if (!(t > 0.0)) throw ConfigError("proxy constant t must be positive");
  if (!(tau >= 1.0)) throw ConfigError("proxy threshold tau must be >= 1");
}

std::vector<ClassCorr> per_class_correlation(const JacobianBatch& jac) {
  const std::size_t d = jac.cols();
  std::map<Label, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < jac.labels.size(); ++i) groups[jac.labels[i]].push_back(i);

  std::vector<ClassCorr> out;
  for (const auto& [label, rows] : groups) {
    const std::size_t n = rows.size();
    if (n < 2) continue;
    // Center each row and keep its norm; corr = <a, b> / (|a| |b|).
    std::vector<std::vector<double>> centered(n, std::vector<double>(d));
    std::vector<double> stddev(n);
    for (std::size_t r = 0; r < n; ++r) {
      const double* row = jac.jacobian.data().data() + rows[r] * d;
      double mean = 0.0;
      for (std::size_t k = 0; k < d; ++k) mean += row[k];
      mean /= static_cast<double>(d);
      double ss = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        centered[r][k] = row[k] - mean;
        ss += centered[r][k] * centered[r][k];
      }
      stddev[r] = std::sqrt(ss / static_cast<double>(d));
    }
    ClassCorr corr{label, Tensor({n, n})};
    for (std::size_t a = 0; a < n; ++a) {
      corr.sigma.at(a, a) = 1.0;
      for (std::size_t b = a + 1; b < n; ++b) {
        double value = std::numeric_limits<double>::quiet_NaN();
        if (stddev[a] >= kDegenerateRowStd && stddev[b] >= kDegenerateRowStd) {
          double dot = 0.0;
          for (std::size_t k = 0; k < d; ++k) dot += centered[a][k] * centered[b][k];
          value = dot / (static_cast<double>(d) * stddev[a] * stddev[b]);
          value = std::clamp(value, -1.0, 1.0);
        }
        corr.sigma.at(a, b) = value;
        corr.sigma.at(b, a) = value;
      }
    }
    out.push_back(std::move(corr));
  }
  return out;
}

double eval_matrix(const ClassCorr& corr, const ProxyParams& params) {
  double acc = 0.0;
  for (double v : corr.sigma.data()) acc += std::log(std::abs(v) + params.t);
  return acc / std::sqrt(static_cast<double>(corr.sigma.size()));
}

ProxyScore score(std::span<const double> e_values, std::size_t num_classes, const ProxyParams& params) {
  if (e_values.empty()) return ProxyScore::worst();
  for (double e : e_values) {
    if (!std::isfinite(e)) return ProxyScore::worst();
  }
  double z = 0.0;
  if (static_cast<double>(num_classes) <= params.tau) {
    for (double e : e_values) z += std::abs(e);
  } else {
    for (std::size_t i = 0; i < e_values.size(); ++i)
      for (std::size_t j = i + 1; j < e_values.size(); ++j) z += std::abs(e_values[i] - e_values[j]);
    z /= static_cast<double>(e_values.size());
  }
  if (!std::isfinite(z)) return ProxyScore::worst();
  return ProxyScore(z, {e_values.begin(), e_values.end()});
}

ProxyScore score_jacobian(const JacobianBatch& jac, const ProxyParams& params) {
  if (!jac.jacobian.all_finite()) return ProxyScore::worst();
  const std::set<Label> present(jac.labels.begin(), jac.labels.end());
  std::vector<double> e_values;
  for (const ClassCorr& corr : per_class_correlation(jac)) {
    if (!corr.sigma.all_finite()) return ProxyScore::worst();
    e_values.push_back(eval_matrix(corr, params));
  }
  return score(e_values, present.size(), params);
}

ProxyScore score_arch(const ArchEncoding& arch, const Tensor& batch, std::span<const Label> labels,
                      const SkeletonConfig& cfg, const ProxyParams& params, Rng& rng) {
  params.validate();
  const Network net = build_network(arch, cfg, rng);
  return score_jacobian(input_jacobian(net, batch, labels), params);
}

}  // namespace gea
