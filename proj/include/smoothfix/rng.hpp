// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

// Counter-based random numbers.
//
// Every random quantity in the library is a pure function of a 64-bit seed.
// Philox4x32-10 (Salmon et al., SC'11) serves both as the keystream for a
// single node or sample and as the keyed hash used to derive child seeds, so
// the value attached to a tree node depends only on its path from the root.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace smoothfix {

using Philox4x32Block = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

/// Ten-round Philox4x32 bijection of `counter` under `key`.
Philox4x32Block philox4x32(Philox4x32Block counter, Philox4x32Key key) noexcept;

/// Derive the seed of child `index` from `seed`.
///
/// Children 2k and 2k+1 share one Philox block, so a binary split costs a
/// single block evaluation when done through SeedSplitter.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Derive an independent seed for a named purpose (stream tag) from `seed`.
std::uint64_t tagged_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

/// Caches the last block so that consecutive child indices are cheap.
class SeedSplitter {
 public:
  explicit SeedSplitter(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t operator()(std::uint64_t index) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t cached_pair_ = std::numeric_limits<std::uint64_t>::max();
  std::array<std::uint64_t, 2> cached_{};
};

/// Keystream generator over Philox blocks. Satisfies
/// UniformRandomBitGenerator so it can drive <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (pos_ == 2) refill();
    return buffer_[pos_++];
  }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  double exponential() noexcept { return -std::log(uniform()); }

  /// Standard normal by Box-Muller; the second variate is cached.
  double normal() noexcept;

  /// Uniform integer in [0, n) by Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) noexcept;

  std::uint64_t blocks_consumed() const noexcept { return block_; }

 private:
  void refill() noexcept;

  Philox4x32Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int pos_ = 2;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace smoothfix
