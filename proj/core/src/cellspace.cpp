#include "gea/cellspace.hpp"

#include <fmt/format.h>

#include "gea/error.hpp"

namespace gea {

std::string_view op_name(OpKind op) noexcept { return kOpNames[static_cast<std::size_t>(op)]; }

OpKind ArchEncoding::op(std::size_t from, std::size_t to) const {
  for (std::size_t e = 0; e < kNumEdges; ++e) {
    if (kEdges[e].from == from && kEdges[e].to == to) return edge_ops[e];
  }
  throw ConfigError(fmt::format("no edge {}->{} in cell", from, to));
}

std::size_t ArchEncoding::index() const noexcept {
  std::size_t idx = 0;
  for (OpKind op : edge_ops) idx = idx * kNumOps + static_cast<std::size_t>(op);
  return idx;
}

ArchEncoding ArchEncoding::from_index(std::size_t index) {
  if (index >= kSpaceSize) throw ConfigError(fmt::format("arch index {} out of range", index));
  ArchEncoding a;
  for (std::size_t e = kNumEdges; e-- > 0;) {
    a.edge_ops[e] = static_cast<OpKind>(index % kNumOps);
    index /= kNumOps;
  }
  return a;
}

std::size_t SpaceDescriptor::size() const noexcept {
  const std::size_t edges = num_nodes * (num_nodes - 1) / 2;
  std::size_t n = 1;
  for (std::size_t e = 0; e < edges; ++e) n *= op_names.size();
  return n;
}

ArchEncoding random_arch(Rng& rng) {
  ArchEncoding a;
  for (auto& op : a.edge_ops) op = static_cast<OpKind>(rng.uniform_int(kNumOps));
  return a;
}

ArchEncoding mutate_with(const ArchEncoding& parent, std::size_t edge, std::size_t choice) {
  if (edge >= kNumEdges || choice >= kNumOps - 1) {
    throw ConfigError(fmt::format("invalid mutation edge={} choice={}", edge, choice));
  }
  ArchEncoding child = parent;
  const auto current = static_cast<std::size_t>(parent.edge_ops[edge]);
  child.edge_ops[edge] = static_cast<OpKind>(choice >= current ? choice + 1 : choice);
  return child;
}

ArchEncoding mutate(const ArchEncoding& parent, Rng& rng) {
  const std::size_t edge = rng.uniform_int(kNumEdges);
  const std::size_t choice = rng.uniform_int(kNumOps - 1);
  return mutate_with(parent, edge, choice);
}

std::vector<ArchEncoding> enumerate_all() {
  std::vector<ArchEncoding> all;
  all.reserve(kSpaceSize);
  for (std::size_t i = 0; i < kSpaceSize; ++i) all.push_back(ArchEncoding::from_index(i));
  return all;
}

std::size_t hamming_distance(const ArchEncoding& a, const ArchEncoding& b) noexcept {
  std::size_t d = 0;
  for (std::size_t e = 0; e < kNumEdges; ++e) d += a.edge_ops[e] != b.edge_ops[e];
  return d;
}

std::string encode_str(const ArchEncoding& arch) {
  std::string out;
  for (std::size_t e = 0; e < kNumEdges; ++e) {
    const Edge& edge = kEdges[e];
    if (edge.from == 0 && edge.to > 1) out += '+';
    out += '|';
    out += op_name(arch.edge_ops[e]);
    out += '~';
    out += static_cast<char>('0' + edge.from);
    if (edge.from + 1 == edge.to) out += '|';
  }
  return out;
}

namespace {

class ArchParser {
 public:
  explicit ArchParser(std::string_view text) : text_(text) {}

  ArchEncoding parse() {
    ArchEncoding arch;
    std::size_t e = 0;
    for (std::size_t node = 1; node < kNumNodes; ++node) {
      if (node > 1) {
        if (pos_ < text_.size() && text_[pos_] != '+') {
          throw ParseError(fmt::format("wrong group arity: group for node {} has more than {} "
                                       "entries at position {}",
                                       node - 1, node - 1, pos_),
                           pos_);
        }
        expect('+');
      }
      expect('|');
      for (std::size_t src = 0; src < node; ++src) {
        const std::size_t token_pos = pos_;
        if (src > 0 && (pos_ >= text_.size() || text_[pos_] == '+')) {
          throw ParseError(fmt::format("wrong group arity: group for node {} has {} entries, "
                                       "expected {} at position {}",
                                       node, src, node, pos_),
                           pos_);
        }
        const std::string_view name = take_until('~');
        arch.edge_ops[e++] = lookup(name, token_pos);
        expect('~');
        const std::size_t idx_pos = pos_;
        const std::string_view idx = take_until('|');
        if (idx.size() != 1 || idx[0] != static_cast<char>('0' + src)) {
          throw ParseError(fmt::format("wrong group arity: expected source index {} but got '{}' "
                                       "at position {}",
                                       src, idx, idx_pos),
                           idx_pos);
        }
        expect('|');
      }
    }
    if (pos_ != text_.size()) {
      throw ParseError(fmt::format("trailing characters '{}' at position {}",
                                   text_.substr(pos_), pos_),
                       pos_);
    }
    return arch;
  }

 private:
  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) {
      const std::string_view got = pos_ < text_.size() ? text_.substr(pos_, 1) : "end of input";
      throw ParseError(fmt::format("malformed arch string: expected '{}' but got '{}' at position {}",
                                   c, got, pos_),
                       pos_);
    }
    ++pos_;
  }

  std::string_view take_until(char stop) {
    const std::size_t begin = pos_;
    while (pos_ < text_.size() && text_[pos_] != stop && text_[pos_] != '|' &&
           text_[pos_] != '+' && text_[pos_] != '~') {
      ++pos_;
    }
    return text_.substr(begin, pos_ - begin);
  }

  static OpKind lookup(std::string_view name, std::size_t pos) {
    for (std::size_t k = 0; k < kNumOps; ++k) {
      if (kOpNames[k] == name) return static_cast<OpKind>(k);
    }
    throw ParseError(fmt::format("unknown op name '{}' at position {}", name, pos), pos);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ArchEncoding decode_str(std::string_view text) { return ArchParser(text).parse(); }

}  // namespace gea
