// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

// Small statistics helpers shared by the Monte Carlo modules.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace smoothfix {

/// Welford accumulator with a dominance tracker for divergence heuristics.
class MeanAccumulator {
 public:
  void add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
    abs_sum_ += std::abs(x);
    if (std::abs(x) > max_abs_) max_abs_ = std::abs(x);
    if (!std::isfinite(x)) finite_ = false;
  }

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stddev() const noexcept { return std::sqrt(variance()); }
  double se() const noexcept { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

  /// Share of the absolute sum carried by the single largest term.
  double max_share() const noexcept { return abs_sum_ > 0.0 ? max_abs_ / abs_sum_ : 0.0; }
  bool finite() const noexcept { return finite_; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double abs_sum_ = 0.0;
  double max_abs_ = 0.0;
  bool finite_ = true;
};

/// Monte Carlo mean with its standard error and a divergence flag.
struct MeanEstimate {
  double value = 0.0;
  double se = 0.0;
  std::size_t samples = 0;
  bool exact = false;
  bool possibly_infinite = false;
};

/// A single draw dominating the sum (or a non-finite draw) is taken as a sign
/// that the underlying expectation may not exist.
inline constexpr double kDominanceThreshold = 0.05;

MeanEstimate to_estimate(const MeanAccumulator& acc);

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);
double standard_error(std::span<const double> xs);
double median(std::vector<double> xs);

/// Empirical characteristic function (1/n) sum exp(i t x).
std::complex<double> ecf(std::span<const double> xs, double t);

/// Two-sided acceptance interval [lo, hi] for a Binomial(n, p) count at the
/// given confidence, from the exact CDF.
struct CountInterval {
  std::size_t lo;
  std::size_t hi;
};
CountInterval binomial_interval(std::size_t n, double p, double confidence);

}  // namespace smoothfix
