// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include "smoothfix/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>

namespace smoothfix {

MeanEstimate to_estimate(const MeanAccumulator& acc) {
  MeanEstimate est;
  est.value = acc.mean();
  est.se = acc.se();
  est.samples = acc.count();
  est.possibly_infinite = !acc.finite() || acc.max_share() > kDominanceThreshold;
  return est;
}

double mean(std::span<const double> xs) {
  MeanAccumulator acc;
  for (double x : xs) acc.add(x);
  return acc.mean();
}

double sample_variance(std::span<const double> xs) {
  MeanAccumulator acc;
  for (double x : xs) acc.add(x);
  return acc.variance();
}

double standard_error(std::span<const double> xs) {
  MeanAccumulator acc;
  for (double x : xs) acc.add(x);
  return acc.se();
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
  std::nth_element(xs.begin(), mid, xs.end());
  if (xs.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(xs.begin(), mid);
  return 0.5 * (lower + upper);
}

std::complex<double> ecf(std::span<const double> xs, double t) {
  double re = 0.0;
  double im = 0.0;
  for (double x : xs) {
    re += std::cos(t * x);
    im += std::sin(t * x);
  }
  const auto n = static_cast<double>(xs.size());
  return {re / n, im / n};
}

CountInterval binomial_interval(std::size_t n, double p, double confidence) {
  const boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
  const double tail = 0.5 * (1.0 - confidence);
  // Smallest lo with P(X < lo) <= tail, largest hi with P(X > hi) <= tail.
  std::size_t lo = 0;
  while (lo < n && boost::math::cdf(dist, static_cast<double>(lo)) <= tail) ++lo;
  std::size_t hi = n;
  while (hi > 0 && boost::math::cdf(boost::math::complement(dist, static_cast<double>(hi - 1))) <= tail) --hi;
  return {lo, hi};
}

}  // namespace smoothfix
