#include "gea/network.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "gea/error.hpp"

namespace gea {

void SkeletonConfig::validate() const {
  if (input_channels < 1 || input_hw < 1 || stem_channels < 1 || cells_per_stage < 1 ||
      num_stages < 1 || num_classes < 1) {
    throw ConfigError("skeleton counts must all be >= 1");
  }
  if (!(bn_eps > 0.0)) throw ConfigError("bn_eps must be positive");
  const std::size_t factor = std::size_t{1} << (num_stages - 1);
  if (input_hw % factor != 0) {
    throw ConfigError(fmt::format("input_hw {} is not divisible by 2^(num_stages-1) = {}",
                                  input_hw, factor));
  }
}

namespace {

// Reverse-mode tape over whole tensors. Nodes whose value does not depend on
// the input are flagged constant and never receive gradients.
class Tape {
 public:
  using Id = std::size_t;

  Id leaf(Tensor value, bool constant) {
    nodes_.push_back({std::move(value), constant, {}});
    return nodes_.size() - 1;
  }

  const Tensor& value(Id id) const { return nodes_[id].value; }
  bool constant(Id id) const { return nodes_[id].constant; }
  double min_relu_margin() const { return min_margin_; }
  // Collects the on/off state of every input-dependent ReLU unit.
  void record_pattern(std::vector<bool>* pattern) { pattern_ = pattern; }

  Id conv(Id x, const Tensor& w, std::size_t stride, std::size_t pad) {
    return unary(x, kernels::conv2d(value(x), w, stride, pad),
                 [&w, stride, pad](const Tensor& g, const Tensor& in, const Tensor&) {
                   return kernels::conv2d_grad_input(g, w, in.shape(), stride, pad);
                 });
  }

  Id batch_norm(Id x, double eps) {
    std::vector<double> inv_std;
    Tensor y = kernels::batch_norm(value(x), eps, &inv_std);
    return unary(x, std::move(y),
                 [inv_std = std::move(inv_std)](const Tensor& g, const Tensor&, const Tensor& out) {
                   return kernels::batch_norm_grad(g, out, inv_std);
                 });
  }

  Id relu(Id x) {
    if (!constant(x)) {
      for (double v : value(x).data()) {
        min_margin_ = std::min(min_margin_, std::abs(v));
        if (pattern_) pattern_->push_back(v > 0.0);
      }
    }
    return unary(x, kernels::relu(value(x)), [](const Tensor& g, const Tensor& in, const Tensor&) {
      return kernels::relu_grad(g, in);
    });
  }

  Id avg_pool(Id x) {
    return unary(x, kernels::avg_pool3x3(value(x)), [](const Tensor& g, const Tensor&, const Tensor&) {
      return kernels::avg_pool3x3_grad(g);
    });
  }

  Id global_pool(Id x) {
    return unary(x, kernels::global_avg_pool(value(x)),
                 [](const Tensor& g, const Tensor& in, const Tensor&) {
                   return kernels::global_avg_pool_grad(g, in.dim(2), in.dim(3));
                 });
  }

  Id dense(Id x, const Tensor& w) {
    return unary(x, kernels::dense(value(x), w), [&w](const Tensor& g, const Tensor&, const Tensor&) {
      return kernels::dense_grad_input(g, w);
    });
  }

  // Elementwise sum; an empty list is the constant zero tensor of `shape`.
  Id sum(const std::vector<Id>& terms, const std::vector<std::size_t>& shape) {
    if (terms.empty()) return leaf(Tensor(shape), true);
    if (terms.size() == 1) return terms.front();
    Tensor acc = value(terms.front());
    bool all_constant = constant(terms.front());
    for (std::size_t i = 1; i < terms.size(); ++i) {
      acc += value(terms[i]);
      all_constant = all_constant && constant(terms[i]);
    }
    Backward back;
    if (!all_constant) {
      back = [terms](Tape& tape, const Tensor& g) {
        for (Id t : terms) tape.accumulate(t, g);
      };
    }
    nodes_.push_back({std::move(acc), all_constant, std::move(back)});
    return nodes_.size() - 1;
  }

  // Propagates `seed` from `output` back to every non-constant node; returns
  // the gradient at `wrt` (zeros if it was never reached).
  Tensor gradient(Id output, Id wrt, Tensor seed) {
    grads_.assign(nodes_.size(), Tensor());
    accumulate(output, std::move(seed));
    for (Id id = output + 1; id-- > 0;) {
      if (grads_[id].empty() || !nodes_[id].backward) continue;
      nodes_[id].backward(*this, grads_[id]);
    }
    if (grads_[wrt].empty()) return Tensor(value(wrt).shape());
    return std::move(grads_[wrt]);
  }

 private:
  using Backward = std::function<void(Tape&, const Tensor&)>;
  using LocalGrad = std::function<Tensor(const Tensor& g, const Tensor& in, const Tensor& out)>;

  struct Node {
    Tensor value;
    bool constant;
    Backward backward;
  };

  void accumulate(Id id, const Tensor& g) {
    if (nodes_[id].constant) return;
    if (grads_[id].empty()) {
      grads_[id] = g;
    } else {
      grads_[id] += g;
    }
  }

  Id unary(Id x, Tensor out, LocalGrad local) {
    const bool is_const = constant(x);
    const Id self = nodes_.size();
    Backward back;
    if (!is_const) {
      back = [x, self, local = std::move(local)](Tape& tape, const Tensor& g) {
        tape.accumulate(x, local(g, tape.value(x), tape.value(self)));
      };
    }
    nodes_.push_back({std::move(out), is_const, std::move(back)});
    return self;
  }

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  double min_margin_ = std::numeric_limits<double>::infinity();
  std::vector<bool>* pattern_ = nullptr;
};

Tensor he_normal(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng) {
  Tensor w(std::move(shape));
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& v : w.data()) v = stddev * rng.normal();
  return w;
}

}  // namespace

// Records a network's computation on a Tape.
class NetworkTracer {
 public:
  NetworkTracer(const Network& net, Tape& tape) : net_(net), tape_(tape) {}

  Tape::Id cell(const Network::Cell& cell, Tape::Id input) {
    std::array<Tape::Id, kNumNodes> nodes{};
    nodes[0] = input;
    const double eps = net_.cfg_.bn_eps;
    for (std::size_t to = 1; to < kNumNodes; ++to) {
      std::vector<Tape::Id> terms;
      for (std::size_t e = 0; e < kNumEdges; ++e) {
        if (kEdges[e].to != to) continue;
        const Tape::Id src = nodes[kEdges[e].from];
        switch (net_.arch_.edge_ops[e]) {
          case OpKind::zeroize:
            break;
          case OpKind::skip_connect:
            terms.push_back(src);
            break;
          case OpKind::conv1x1:
            terms.push_back(tape_.batch_norm(tape_.conv(tape_.relu(src), cell.edge_weights[e], 1, 0), eps));
            break;
          case OpKind::conv3x3:
            terms.push_back(tape_.batch_norm(tape_.conv(tape_.relu(src), cell.edge_weights[e], 1, 1), eps));
            break;
          case OpKind::avgpool3x3:
            terms.push_back(tape_.avg_pool(src));
            break;
        }
      }
      nodes[to] = tape_.sum(terms, tape_.value(input).shape());
    }
    return nodes[kNumNodes - 1];
  }

  Tape::Id logits(Tape::Id input) {
    const double eps = net_.cfg_.bn_eps;
    Tape::Id x = tape_.batch_norm(tape_.conv(input, net_.stem_, 1, 1), eps);
    for (const auto& stage : net_.stages_) {
      if (!stage.reduction.empty()) {
        x = tape_.batch_norm(tape_.conv(tape_.relu(x), stage.reduction, 2, 1), eps);
      }
      for (const auto& c : stage.cells) x = cell(c, x);
    }
    return tape_.dense(tape_.global_pool(tape_.relu(x)), net_.classifier_);
  }

 private:
  const Network& net_;
  Tape& tape_;
};

Network Network::build(const ArchEncoding& arch, const SkeletonConfig& cfg, Rng& rng) {
  cfg.validate();
  Network net;
  net.arch_ = arch;
  net.cfg_ = cfg;
  const std::size_t cin = cfg.input_channels;
  net.stem_ = he_normal({cfg.stem_channels, cin, 3, 3}, cin * 9, rng);
  std::size_t channels = cfg.stem_channels;
  for (std::size_t s = 0; s < cfg.num_stages; ++s) {
    Stage stage;
    if (s > 0) {
      stage.reduction = he_normal({2 * channels, channels, 3, 3}, channels * 9, rng);
      channels *= 2;
    }
    stage.channels = channels;
    for (std::size_t c = 0; c < cfg.cells_per_stage; ++c) {
      Cell cell;
      for (std::size_t e = 0; e < kNumEdges; ++e) {
        if (arch.edge_ops[e] == OpKind::conv1x1) {
          cell.edge_weights[e] = he_normal({channels, channels, 1, 1}, channels, rng);
        } else if (arch.edge_ops[e] == OpKind::conv3x3) {
          cell.edge_weights[e] = he_normal({channels, channels, 3, 3}, channels * 9, rng);
        }
      }
      stage.cells.push_back(std::move(cell));
    }
    net.stages_.push_back(std::move(stage));
  }
  net.classifier_ = he_normal({cfg.num_classes, channels}, channels, rng);
  return net;
}

void Network::check_batch(const Tensor& batch) const {
  const auto& s = batch.shape();
  if (s.size() != 4 || s[1] != cfg_.input_channels || s[2] != cfg_.input_hw ||
      s[3] != cfg_.input_hw) {
    throw ShapeError(fmt::format("batch shape {} does not match skeleton (N, {}, {}, {})", s,
                                 cfg_.input_channels, cfg_.input_hw, cfg_.input_hw));
  }
  if (s[0] < 2) throw ShapeError("batch-statistics normalization needs at least 2 samples");
}

Tensor Network::forward(const Tensor& batch) const {
  check_batch(batch);
  Tape tape;
  NetworkTracer tracer(*this, tape);
  const Tape::Id out = tracer.logits(tape.leaf(batch, false));
  return tape.value(out);
}


Tensor Network::output_sum_gradient(const Tensor& batch) const {
  check_batch(batch);
  Tape tape;
  NetworkTracer tracer(*this, tape);
  const Tape::Id in = tape.leaf(batch, false);
  const Tape::Id out = tracer.logits(in);
  return tape.gradient(out, in, Tensor(tape.value(out).shape(), 1.0));
}

double Network::min_relu_margin(const Tensor& batch) const {
  check_batch(batch);
  Tape tape;
  NetworkTracer tracer(*this, tape);
  tracer.logits(tape.leaf(batch, false));
  return tape.min_relu_margin();
}

Tensor Network::run_cell(std::size_t stage, std::size_t cell, const Tensor& input) const {
  const Stage& st = stages_.at(stage);
  if (input.rank() != 4 || input.dim(1) != st.channels) {
    throw ShapeError(fmt::format("cell input {} needs {} channels", input.shape(), st.channels));
  }
  Tape tape;
  NetworkTracer tracer(*this, tape);
  return tape.value(tracer.cell(st.cells.at(cell), tape.leaf(input, false)));
}

std::vector<double> Network::flat_parameters() const {
  std::vector<double> out(stem_.data().begin(), stem_.data().end());
  auto append = [&out](const Tensor& t) { out.insert(out.end(), t.data().begin(), t.data().end()); };
  for (const auto& stage : stages_) {
    append(stage.reduction);
    for (const auto& cell : stage.cells)
      for (const auto& w : cell.edge_weights) append(w);
  }
  append(classifier_);
  return out;
}

Network build_network(const ArchEncoding& arch, const SkeletonConfig& cfg, Rng& rng) {
  return Network::build(arch, cfg, rng);
}

Tensor forward(const Network& net, const Tensor& batch) { return net.forward(batch); }

JacobianBatch input_jacobian(const Network& net, const Tensor& batch, std::span<const Label> labels) {
  const Tensor grad = net.output_sum_gradient(batch);
  const std::size_t n = batch.dim(0);
  if (labels.size() != n) {
    throw ShapeError(fmt::format("{} labels for a batch of {}", labels.size(), n));
  }
  for (Label l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= net.config().num_classes) {
      throw ShapeError(fmt::format("label {} outside [0, {})", l, net.config().num_classes));
    }
  }
  return {grad.reshaped({n, batch.size() / n}), {labels.begin(), labels.end()}};
}

std::vector<bool> Network::relu_pattern(const Tensor& batch) const {
  std::vector<bool> pattern;
  output_sum(batch, &pattern);
  return pattern;
}

double Network::output_sum(const Tensor& batch, std::vector<bool>* pattern) const {
  check_batch(batch);
  Tape tape;
  tape.record_pattern(pattern);
  NetworkTracer tracer(*this, tape);
  return tape.value(tracer.logits(tape.leaf(batch, false))).sum();
}

Tensor finite_diff_jacobian(const Network& net, const Tensor& batch, double step,
                            std::size_t* kink_crossings, bool stop_at_kink) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  const std::size_t n = batch.dim(0);
  std::vector<bool> base, probe;
  std::vector<bool>* track = kink_crossings ? &probe : nullptr;
  if (kink_crossings) {
    *kink_crossings = 0;
    base = net.relu_pattern(batch);
  }
  Tensor x = batch;
  Tensor out({n, batch.size() / n});
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    bool crossed = false;
    probe.clear();
    x[i] = orig + step;
    const double plus = net.output_sum(x, track);
    crossed = track && probe != base;
    probe.clear();
    x[i] = orig - step;
    const double minus = net.output_sum(x, track);
    crossed = crossed || (track && probe != base);
    x[i] = orig;
    out[i] = (plus - minus) / (2.0 * step);
    if (crossed) {
      ++*kink_crossings;
      if (stop_at_kink) break;
    }
  }
  return out;
}

}  // namespace gea
