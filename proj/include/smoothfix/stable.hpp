// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

// Stable laws S_α(σ, β, μ) with characteristic exponent
//   ψ(t) = iμt - σ^α|t|^α (1 - iβ sgn(t) tan(πα/2))        α ≠ 1
//   ψ(t) = iμt - σ|t| (1 + iβ sgn(t) (2/π) log|t|)          α = 1
// and the solution families X = W* + μW + W^{1/α} Y built on them.
#pragma once

#include <complex>
#include <cstdint>
#include <string_view>
#include <vector>

#include "smoothfix/fixpoints.hpp"
#include "smoothfix/models.hpp"
#include "smoothfix/rng.hpp"
#include "smoothfix/spectral.hpp"

namespace smoothfix {

struct StableParams {
  double alpha = 2.0;
  double sigma = 1.0;
  double beta = 0.0;
  double mu = 0.0;

  /// Throws InvalidArgument unless α ∈ (0,2], σ >= 0, β ∈ [-1,1] and
  /// β = 0 when α = 2.
  void validate() const;
};

std::complex<double> stable_psi(const StableParams& p, double t);

/// One Chambers-Mallows-Stuck draw. α = 1 supports β = 0 only.
double draw_stable(const StableParams& p, CounterRng& rng);

std::vector<double> sample_stable(const StableParams& p, std::size_t n, std::uint64_t seed);

enum class Regime { alpha_ne_1_2, alpha_eq_1, alpha_eq_2 };

std::string_view to_string(Regime regime) noexcept;
Regime parse_regime(std::string_view text);
/// Regime matching α, to within 1e-8.
Regime regime_for_alpha(double alpha);

/// One member of the solution families for a model with exponent α.
struct SolutionSpec {
  Regime regime = Regime::alpha_eq_1;
  double sigma = 1.0;
  /// Skewness; regime alpha_ne_1_2 only.
  double beta = 0.0;
  /// Shift μ multiplying W; regime alpha_eq_1 only.
  double mu = 0.0;
  bool inhomogeneous = false;
  BasicSequenceModel model = builtin_model("quicksort");
  /// Truncation depth for (W*, W).
  std::uint32_t depth = 20;
  double weight_floor = 0.0;

  /// Parameter ranges of the family for this regime, and regime/α agreement.
  void validate(double alpha) const;
};

/// The integrand of the family's characteristic function for one pair:
/// exp(i W* t - σ^α W |t|^α [1 - iβ sgn(t) tan(πα/2)]) and its α = 1, 2 forms.
/// W* is ignored for homogeneous specs.
std::complex<double> solution_cf_term(const SolutionSpec& spec, double alpha, double wstar, double w, double t);

struct CfEstimate {
  std::complex<double> value;
  double se_re = 0.0;
  double se_im = 0.0;
};

/// Monte Carlo average of solution_cf_term over the coupled pairs.
CfEstimate solution_cf(const SolutionSpec& spec, double alpha, const CoupledBatch& coupled, double t);

/// Coupled pairs for a spec: full (W*, W) when inhomogeneous, W alone
/// (W* = 0) otherwise.
CoupledBatch solution_pairs(const SolutionSpec& spec, const SpectralProfile& profile,
                            const AssumptionReport& report, std::size_t batch, std::uint64_t seed,
                            unsigned workers = 1);

/// X = w* + μ w + w^{1/α} y, y ~ S_α(σ, β, 0) independent of the pair.
SampleBatch solution_sample(const SolutionSpec& spec, const SpectralProfile& profile,
                            const AssumptionReport& report, std::size_t batch, std::uint64_t seed,
                            unsigned workers = 1);

/// Same construction from given pairs.
std::vector<double> solution_from_pairs(const SolutionSpec& spec, double alpha, const CoupledBatch& pairs,
                                        std::uint64_t seed);

}  // namespace smoothfix
