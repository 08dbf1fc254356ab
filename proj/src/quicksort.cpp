// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include "smoothfix/quicksort.hpp"

#include <stdexcept>
#include <string>

#include "smoothfix/error.hpp"
#include "smoothfix/parallel.hpp"
#include "smoothfix/rng.hpp"
#include "smoothfix/spectral.hpp"
#include "smoothfix/stable.hpp"

namespace smoothfix {
namespace {

constexpr std::uint64_t kTagKeys = 0x6b657973ull;      // "keys"
constexpr std::uint64_t kTagFamily = 0x66616d6cull;    // "faml"
constexpr std::uint64_t kAnalysisSeed = 0x5153ull;

std::uint64_t sort_range(double* keys, std::size_t n) {
  if (n <= 1) return 0;
  const double pivot = keys[0];
  std::size_t i = 0, greater = 0;
  std::uint64_t partition_comparisons = 0;
  for (std::size_t j = 1; j < n; ++j) {
    ++partition_comparisons;
    if (keys[j] < pivot)
      std::swap(keys[++i], keys[j]);
    else if (keys[j] >= pivot)
      ++greater;
  }
  std::swap(keys[0], keys[i]);
  const std::size_t left = i;
  if (partition_comparisons != n - 1 || left + greater != n - 1)
    throw std::logic_error("partition of " + std::to_string(n) + " keys into " + std::to_string(left) + " + " +
                           std::to_string(greater) + " breaks C_n = (n-1) + C_left + C_right");
  return partition_comparisons + sort_range(keys, left) + sort_range(keys + i + 1, greater);
}

const ModelAnalysis& quicksort_analysis() {
  static const ModelAnalysis analysis = analyze_model(builtin_model("quicksort"), kAnalysisSeed);
  return analysis;
}

}  // namespace

double exact_mean(std::size_t n) {
  thread_local std::vector<double> memo{0.0};
  thread_local double prefix = 0.0;  // Σ_{k < memo.size()} E C_k
  while (memo.size() <= n) {
    const std::size_t k = memo.size();
    const double value = static_cast<double>(k - 1) + 2.0 * prefix / static_cast<double>(k);
    prefix += value;
    memo.push_back(value);
  }
  return memo[n];
}

double exact_mean_closed_form(std::size_t n) {
  double h = 0.0;
  for (std::size_t k = n; k >= 1; --k) h += 1.0 / static_cast<double>(k);
  return 2.0 * static_cast<double>(n + 1) * h - 4.0 * static_cast<double>(n);
}

std::uint64_t count_comparisons(std::vector<double>& keys) { return sort_range(keys.data(), keys.size()); }

QuicksortRun run_quicksort(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(tagged_seed(seed, kTagKeys), stream);
  std::vector<double> keys(n);
  for (auto& k : keys) k = rng.uniform();
  QuicksortRun run;
  run.n = n;
  run.comparisons = count_comparisons(keys);
  run.normalized = n == 0 ? 0.0 : (static_cast<double>(run.comparisons) - exact_mean(n)) / static_cast<double>(n);
  return run;
}

SampleBatch simulate_cn(std::size_t n, std::size_t reps, std::uint64_t seed, unsigned workers) {
  if (n < 2) throw InvalidArgument("simulate_cn needs n >= 2");
  if (reps == 0) throw InvalidArgument("simulate_cn needs at least one repetition");
  exact_mean(n);
  SampleBatch out;
  out.values.resize(reps);
  parallel_for(reps, workers, [&](std::size_t r) { out.values[r] = run_quicksort(n, seed, r).normalized; });
  out.seed = seed;
  out.model = "quicksort";
  out.quantity = "Cn";
  summarize(out);
  return out;
}

TestReport quicksort_family_check(double mu, double sigma, std::uint64_t seed, const FamilyCheckOptions& options) {
  if (!(sigma >= 0.0)) throw InvalidArgument("σ must be >= 0");
  const auto& analysis = quicksort_analysis();
  SolutionSpec spec;
  spec.regime = Regime::alpha_eq_1;
  spec.mu = mu;
  spec.sigma = sigma;
  spec.inhomogeneous = true;
  spec.depth = options.depth;
  spec.weight_floor = options.weight_floor;
  const std::uint64_t sample_seed = tagged_seed(seed, kTagFamily);
  const auto candidate =
      solution_sample(spec, analysis.profile, analysis.report, 2 * options.n, sample_seed, options.workers);
  TestOptions test = options.test;
  test.statistic = auto_statistic(spec, analysis.profile.alpha);
  test.workers = options.workers;
  return fixed_point_test(spec.model, candidate.values, options.n, seed, test);
}

}  // namespace smoothfix
