#include "gea/rng.hpp"

#include <cmath>
#include <numbers>

namespace gea {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
constexpr std::uint32_t kSplitTag = 0x53504C54u;  // "SPLT"

inline std::array<std::uint32_t, 2> key_words(std::uint64_t key) {
  return {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
}

}  // namespace

Rng::Block Rng::philox(const Block& counter, std::array<std::uint32_t, 2> key) noexcept {
  Block c = counter;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ key[0], lo1, hi0 ^ c[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return c;
}

Rng::Rng(std::uint64_t seed) noexcept : key_(seed) {}

std::uint64_t Rng::next_u64() noexcept {
  // Each block yields two 64-bit values; block b covers draws 2b and 2b+1.
  const std::uint64_t block = drawn_ >> 1;
  if ((drawn_ & 1u) == 0) {
    buffer_ = philox({static_cast<std::uint32_t>(block),
                      static_cast<std::uint32_t>(block >> 32), 0u, 0u},
                     key_words(key_));
  }
  const unsigned half = static_cast<unsigned>(drawn_ & 1u) * 2;
  ++drawn_;
  return (static_cast<std::uint64_t>(buffer_[half + 1]) << 32) | buffer_[half];
}

std::uint64_t Rng::uniform_int(std::uint64_t n) noexcept {
  // High 64 bits of the 128-bit product draw * n.
  const std::uint64_t a = next_u64();
  const std::uint64_t a_lo = a & 0xFFFFFFFFu, a_hi = a >> 32;
  const std::uint64_t b_lo = n & 0xFFFFFFFFu, b_hi = n >> 32;
  const std::uint64_t lo_lo = a_lo * b_lo;
  const std::uint64_t hi_lo = a_hi * b_lo;
  const std::uint64_t lo_hi = a_lo * b_hi;
  const std::uint64_t cross = (lo_lo >> 32) + (hi_lo & 0xFFFFFFFFu) + lo_hi;
  return a_hi * b_hi + (hi_lo >> 32) + (cross >> 32);
}

double Rng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::split(std::uint64_t index) const noexcept {
  const Block out = philox({static_cast<std::uint32_t>(index),
                            static_cast<std::uint32_t>(index >> 32), kSplitTag, 1u},
                           key_words(key_));
  return Rng((static_cast<std::uint64_t>(out[1]) << 32) | out[0]);
}

}  // namespace gea
