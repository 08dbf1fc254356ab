// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

// Statistical checks of the fixed-point property X =d C + Σ T_j X_j and
// diagnostics of the multiplicative martingale Φ_n(t) = Π_{|v|=n} φ(L(v)t).
#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "smoothfix/fixpoints.hpp"
#include "smoothfix/models.hpp"
#include "smoothfix/stable.hpp"
#include "smoothfix/wbp.hpp"

namespace smoothfix {

enum class Statistic { energy, ecf };

std::string_view to_string(Statistic s) noexcept;
Statistic parse_statistic(std::string_view text);

struct TestOptions {
  double level = 0.01;
  std::size_t n_perm = 499;
  Statistic statistic = Statistic::energy;
  /// Positive half of the ECF grid; the statistic is symmetric in t.
  std::vector<double> ecf_grid{0.25, 0.5, 1.0, 2.0};
  unsigned workers = 1;
};

struct TestReport {
  double statistic = 0.0;
  double pvalue = 1.0;
  std::size_t n_permutations = 0;
  bool pass = true;
  double level = 0.01;
  std::string_view statistic_name = "energy";
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::uint64_t seed = 0;
};

/// Permutation two-sample test of equal laws. p-value = (1 + #{perm >= obs}) / (n_perm + 1).
TestReport two_sample_test(std::span<const double> a, std::span<const double> b, std::uint64_t seed,
                           const TestOptions& options = {});

/// Energy statistic n m/(n+m) (2 E|X-Y| - E|X-X'| - E|Y-Y'|) in O((n+m) log(n+m)).
double energy_statistic(std::span<const double> a, std::span<const double> b);

/// sup_t |ECF_a(t) - ECF_b(t)| over ±grid.
double ecf_statistic(std::span<const double> a, std::span<const double> b, std::span<const double> grid);

/// c + Σ t_j x_{i_j} for `count` fresh model draws, the x resampled with
/// replacement from `x`.
std::vector<double> apply_transform(const BasicSequenceModel& model, std::span<const double> x, std::size_t count,
                                    std::uint64_t seed);

/// Two-sample test of `n` candidate draws against `n` transformed draws.
/// When at least 2n candidates are given, the transform resamples from the
/// candidates beyond the first n so the two sides are independent.
TestReport fixed_point_test(const BasicSequenceModel& model, std::span<const double> candidate, std::size_t n,
                            std::uint64_t seed, const TestOptions& options = {});

/// ECF statistic for σ > 0 and α <= 1 (no finite first moment), else energy.
Statistic auto_statistic(const SolutionSpec& spec, double alpha) noexcept;

using CharacteristicFunction = std::function<std::complex<double>(double)>;

/// A solution's characteristic function t -> (1/M) Σ solution_cf_term(...)
/// over coupled pairs, tabulated for |t| <= t_max with cubic Hermite
/// interpolation from exact values and derivatives at the knots. Arguments
/// beyond t_max, and for α ∉ {1, 2} those within the first kExactIntervals
/// intervals, are evaluated exactly. φ(-t) = conj φ(t).
class TabulatedCF {
 public:
  TabulatedCF(const SolutionSpec& spec, double alpha, const CoupledBatch& pairs, double t_max,
              std::size_t intervals = 4096);

  std::complex<double> operator()(double t) const;
  std::complex<double> exact(double t) const;
  double t_max() const noexcept { return t_max_; }

  static constexpr std::size_t kExactIntervals = 64;

 private:
  std::complex<double> exact_with_derivative(double t, std::complex<double>* derivative) const;

  SolutionSpec spec_;
  double alpha_;
  std::vector<double> wstar_;
  std::vector<double> w_;
  double t_max_;
  double step_;
  double exact_below_ = 0.0;
  std::vector<std::complex<double>> values_;
  std::vector<std::complex<double>> slopes_;
};

struct CFTrace {
  std::vector<double> t_grid;
  std::uint32_t depth_max = 0;
  /// values[n][k] = Φ_n(t_k) on the first tree; reference[n][k] the limit
  /// form evaluated with W_n (and W*_{n-1}) of that tree.
  std::vector<std::vector<std::complex<double>>> values;
  std::vector<std::vector<std::complex<double>>> reference;
  /// sup_k |Φ_n(t_k) - reference| on the first tree.
  std::vector<double> deviation;
  /// Mean of that sup-deviation over all trees of the batch.
  std::vector<double> mean_deviation;
  /// Largest sup-deviation over all trees.
  std::vector<double> max_deviation;
  /// Batch mean of Φ_n(t_k) and φ(t_k).
  std::vector<std::vector<std::complex<double>>> batch_mean;
  std::vector<std::complex<double>> phi;
  std::size_t trees = 0;
};

/// Φ_n(t) for n = 0..depth_max on `trees` independent trees. Homogeneous
/// specs use Φ_n(t) = Π_{|v|=n} φ(L(v)t); inhomogeneous specs multiply by
/// exp(i W*_{n-1} t) with W*_{n-1} = Σ_{|v|<n} L(v)C(v).
CFTrace disintegration_track(const SolutionSpec& spec, double alpha, const CharacteristicFunction& phi,
                             std::uint32_t depth_max, std::span<const double> t_grid, std::uint64_t seed,
                             std::size_t trees = 1, unsigned workers = 1);

/// Limit form: exp(i W*_{n-1} t) times exp(iμWt - σW|t|) (α = 1),
/// exp(-σ²W t²) (α = 2) or exp(-σ^α W|t|^α [1 - iβ sgn(t) tan(πα/2)]).
std::complex<double> disintegration_reference(const SolutionSpec& spec, double alpha, double wstar_prev, double w,
                                              double t);

/// Π_{|v|=n} φ(L(v)t) over generation n of a stored tree.
std::complex<double> generation_product(const WeightedTree& tree, std::uint32_t n, const CharacteristicFunction& phi,
                                        double t);

struct MeanIdentityPoint {
  double t;
  std::complex<double> mean_phi;
  double se_re;
  double se_im;
  std::complex<double> cf;
  double cf_se_re;
  double cf_se_im;
  bool within;
};

struct MeanIdentityReport {
  std::vector<MeanIdentityPoint> points;
  std::uint32_t depth = 0;
  std::size_t batch = 0;
  double n_se = 4.0;
  bool all_within = true;
};

/// Batch mean of Φ_depth(t) against solution_cf(spec, coupled, t). The band
/// is n_se standard errors of the difference of the two independent
/// estimates, real and imaginary parts separately.
MeanIdentityReport mean_identity_check(const SolutionSpec& spec, double alpha, const CoupledBatch& coupled,
                                       std::uint32_t depth, std::span<const double> t_grid, std::size_t batch,
                                       std::uint64_t seed, unsigned workers = 1);

}  // namespace smoothfix
