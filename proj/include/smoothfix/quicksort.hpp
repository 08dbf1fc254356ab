// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

// Key comparisons of Quicksort, whose normalized limit is the fixed point
// X =d U X_1 + (1-U) X_2 + g(U).
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "smoothfix/fixpoints.hpp"
#include "smoothfix/verify.hpp"

namespace smoothfix {

struct QuicksortRun {
  std::size_t n = 0;
  std::uint64_t comparisons = 0;
  /// (comparisons - exact_mean(n)) / n
  double normalized = 0.0;
};

/// E C_n from the recursion E C_n = (n-1) + (2/n) Σ_{k<n} E C_k, memoized
/// per thread.
double exact_mean(std::size_t n);

/// 2(n+1)H_n - 4n.
double exact_mean_closed_form(std::size_t n);

/// Quicksort with the first element as pivot; returns the comparison count.
/// Throws std::logic_error if a partition ever violates
/// C_n = (n-1) + C_left + C_right with the sublist sizes summing to n-1.
std::uint64_t count_comparisons(std::vector<double>& keys);

/// One run on n i.i.d. uniform keys drawn from (seed, stream).
QuicksortRun run_quicksort(std::size_t n, std::uint64_t seed, std::uint64_t stream);

/// `reps` independent normalized runs.
SampleBatch simulate_cn(std::size_t n, std::size_t reps, std::uint64_t seed, unsigned workers = 1);

struct FamilyCheckOptions {
  std::size_t n = 5000;
  /// Trees for W* (depth and weight floor as in SolutionSpec).
  std::uint32_t depth = 20;
  double weight_floor = 1e-3;
  TestOptions test;
  unsigned workers = 1;
};

/// Draws 2n samples of W* + Cauchy(μ, σ) (W* alone for σ = 0) and runs
/// fixed_point_test under the quicksort model. The statistic is chosen by
/// auto_statistic; options.test supplies the level and permutation count.
TestReport quicksort_family_check(double mu, double sigma, std::uint64_t seed, const FamilyCheckOptions& options = {});

}  // namespace smoothfix
