#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gea {

// Counter-based Philox4x32-10 generator (Salmon et al., Random123).
//
// A stream is identified by a 64-bit key; draws are produced by encrypting
// an incrementing 128-bit counter, so every value is a pure function of
// (key, position). split(i) derives an independent child stream whose key is
// the Philox encryption of (i, tag) under the parent key; the parent is not
// advanced. All derived quantities (uniform ints, reals, normals) consume a
// fixed number of 64-bit draws so trajectories replay exactly.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept { return next_u64(); }

  std::uint64_t next_u64() noexcept;

  // Uniform in [0, n) using the multiply-shift map (one draw, no rejection).
  // The bias is below n / 2^64 and irrelevant for the small n used here.
  std::uint64_t uniform_int(std::uint64_t n) noexcept;

  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;

  // Standard normal by Box-Muller; consumes exactly two draws.
  double normal() noexcept;

  Rng split(std::uint64_t index) const noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return drawn_; }

  using Block = std::array<std::uint32_t, 4>;
  // Raw Philox4x32-10 block function, exposed for known-answer tests.
  static Block philox(const Block& counter, std::array<std::uint32_t, 2> key) noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t drawn_ = 0;  // number of 64-bit values produced
  Block buffer_{};
};

}  // namespace gea
