// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include "smoothfix/rng.hpp"

#include <numbers>

namespace smoothfix {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

__extension__ using uint128 = unsigned __int128;

// Stream tags keep the hash domains of child seeds and named seeds apart.
constexpr std::uint32_t kChildDomain = 0x43484c44u;  // "CHLD"
constexpr std::uint32_t kTagDomain = 0x54414753u;    // "TAGS"

inline void philox_round(Philox4x32Block& ctr, const Philox4x32Key& key) noexcept {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
  ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
}

inline std::uint64_t join(std::uint32_t lo, std::uint32_t hi) noexcept {
  return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
}

inline Philox4x32Key key_of(std::uint64_t seed) noexcept {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

}  // namespace

Philox4x32Block philox4x32(Philox4x32Block counter, Philox4x32Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    philox_round(counter, key);
  }
  return counter;
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  const std::uint64_t pair = index >> 1;
  const auto out = philox4x32({static_cast<std::uint32_t>(pair), static_cast<std::uint32_t>(pair >> 32),
                               kChildDomain, 0u},
                              key_of(seed));
  return (index & 1u) ? join(out[2], out[3]) : join(out[0], out[1]);
}

std::uint64_t tagged_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  const auto out = philox4x32({static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
                               kTagDomain, 0u},
                              key_of(seed));
  return join(out[0], out[1]);
}

std::uint64_t SeedSplitter::operator()(std::uint64_t index) noexcept {
  const std::uint64_t pair = index >> 1;
  if (pair != cached_pair_) {
    const auto out = philox4x32({static_cast<std::uint32_t>(pair), static_cast<std::uint32_t>(pair >> 32),
                                 kChildDomain, 0u},
                                key_of(seed_));
    cached_ = {join(out[0], out[1]), join(out[2], out[3])};
    cached_pair_ = pair;
  }
  return cached_[index & 1u];
}

void CounterRng::refill() noexcept {
  const auto out = philox4x32({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                               static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                              key_);
  ++block_;
  buffer_ = {join(out[0], out[1]), join(out[2], out[3])};
  pos_ = 0;
}

double CounterRng::normal() noexcept {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = radius * std::sin(angle);
  has_spare_normal_ = true;
  return radius * std::cos(angle);
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
  // Lemire, "Fast random integer generation in an interval" (2019).
  uint128 product = static_cast<uint128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(product);
  if (low < n) {
    const std::uint64_t threshold = -n % n;
    while (low < threshold) {
      product = static_cast<uint128>((*this)()) * n;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

}  // namespace smoothfix
