#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gea/rng.hpp"

namespace gea {

enum class OpKind : std::uint8_t {
  zeroize = 0,
  skip_connect = 1,
  conv1x1 = 2,
  conv3x3 = 3,
  avgpool3x3 = 4,
};

inline constexpr std::size_t kNumOps = 5;
inline constexpr std::size_t kNumNodes = 4;
inline constexpr std::size_t kNumEdges = 6;
inline constexpr std::size_t kSpaceSize = 15625;  // kNumOps ^ kNumEdges

struct Edge {
  std::size_t from;
  std::size_t to;
};

// Edge order is grouped by destination node, sources ascending, which is also
// the order the canonical string lists them in.
inline constexpr std::array<Edge, kNumEdges> kEdges{{
    {0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3},
}};

// Canonical benchmark names, indexed by OpKind.
inline constexpr std::array<std::string_view, kNumOps> kOpNames{
    "none", "skip_connect", "nor_conv_1x1", "nor_conv_3x3", "avg_pool_3x3"};

std::string_view op_name(OpKind op) noexcept;

// Cell genotype: one operation per edge, indexed as in kEdges.
struct ArchEncoding {
  std::array<OpKind, kNumEdges> edge_ops{};

  friend bool operator==(const ArchEncoding&, const ArchEncoding&) = default;
  friend auto operator<=>(const ArchEncoding&, const ArchEncoding&) = default;

  OpKind op(std::size_t from, std::size_t to) const;

  // Base-5 rank with edge 0 most significant; matches lexicographic order.
  std::size_t index() const noexcept;
  static ArchEncoding from_index(std::size_t index);
};

struct SpaceDescriptor {
  std::size_t num_nodes = kNumNodes;
  std::vector<std::string> op_names{kOpNames.begin(), kOpNames.end()};

  std::size_t size() const noexcept;
  friend bool operator==(const SpaceDescriptor&, const SpaceDescriptor&) = default;
};

ArchEncoding random_arch(Rng& rng);

// Replaces the op on one uniformly chosen edge by one of the other four ops.
ArchEncoding mutate(const ArchEncoding& parent, Rng& rng);

// Deterministic core of mutate: `choice` in [0, 4) indexes the ops that differ
// from the current one, in OpKind order.
ArchEncoding mutate_with(const ArchEncoding& parent, std::size_t edge, std::size_t choice);

std::vector<ArchEncoding> enumerate_all();

std::size_t hamming_distance(const ArchEncoding& a, const ArchEncoding& b) noexcept;

std::string encode_str(const ArchEncoding& arch);

// Throws ParseError naming the offending token and its byte position.
ArchEncoding decode_str(std::string_view text);

}  // namespace gea

template <>
struct std::hash<gea::ArchEncoding> {
  std::size_t operator()(const gea::ArchEncoding& a) const noexcept { return a.index(); }
};
