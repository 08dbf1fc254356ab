// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

// m(θ) = E Σ T_j^θ, the characteristic exponent α solving m(α) = 1, and
// the standing assumptions on (C, T).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smoothfix/error.hpp"
#include "smoothfix/models.hpp"
#include "smoothfix/stats.hpp"

namespace smoothfix {

/// m(θ) with its standard error (zero when closed-form).
MeanEstimate eval_m(const BasicSequenceModel& model, double theta, std::size_t mc_budget, std::uint64_t seed);

struct SpectralOptions {
  double theta_max = 8.0;
  double grid_step = 0.05;
  std::size_t mc_budget = 200'000;
  std::uint64_t seed = 0;
  /// Use the analytic m when the model provides one.
  bool prefer_closed_form = true;
};

struct SpectralProfile {
  double alpha = 0.0;
  double m_alpha = 0.0;
  double m_prime_alpha = 0.0;
  /// |m(α) - 1| at the returned root.
  double residual = 0.0;
  /// Bound the residual is certified against: 1e-10 closed-form, 3 SE Monte Carlo.
  double residual_bound = 0.0;
  /// Standard error of m at α (0 when closed-form).
  double m_alpha_se = 0.0;
  std::size_t mc_samples = 0;
  bool closed_form = true;
  bool m_prime_negative = false;
  /// Smallest m(β) on the grid β ∈ {α/10, ..., 9α/10}.
  double min_m_below_alpha = 0.0;
};

/// Thrown when α cannot be located or (A3) visibly fails.
class SpectralError : public PreconditionError {
 public:
  enum class Kind { a2_violated, no_bracket, a3_violated };
  SpectralError(Kind kind, const std::string& what) : PreconditionError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

SpectralProfile find_alpha(const BasicSequenceModel& model, const SpectralOptions& options = {});

/// Closed-form or common-random-number m evaluator for a model.
class MEvaluator {
 public:
  MEvaluator(const BasicSequenceModel& model, std::size_t mc_budget, std::uint64_t seed, bool prefer_closed_form);

  bool closed_form() const noexcept { return closed_form_; }
  std::size_t samples() const noexcept { return draws_; }
  MeanEstimate m(double theta) const;
  /// m'(θ) analytically, or by central difference h = 1e-6 on the sample.
  double dm(double theta) const;

 private:
  const BasicSequenceModel* model_;
  bool closed_form_;
  std::size_t draws_ = 0;
  std::vector<double> log_weights_;
  std::vector<std::uint32_t> offsets_;
};

struct AssumptionOptions {
  std::size_t mc_budget = 200'000;
  std::uint64_t seed = 0;
  /// Trees used by the C1 moment-trajectory heuristic.
  std::size_t c1_trees = 400;
  std::uint32_t c1_depth = 12;
};

struct AssumptionReport {
  Tri a1 = Tri::unknown;
  bool a2 = false;
  bool a3 = false;
  Tri a4a = Tri::unknown;
  Tri a4b = Tri::unknown;
  Tri a5 = Tri::unknown;
  Tri c1 = Tri::unknown;
  Tri c2 = Tri::unknown;
  std::string notes;

  // Supporting estimates.
  double m0 = 0.0;
  /// E Σ T^α log T
  double log_moment = 0.0;
  /// E (Σ T^α) log+(Σ T^α)
  double llog_moment = 0.0;
  /// E Σ T^α (log- T)^2
  double a5_moment = 0.0;
  /// β found for C2, 0 if none.
  double c2_beta = 0.0;
  /// Late-to-early increment ratios of E|W*_n|^p, p = 1, 2.
  double c1_ratio_p1 = 0.0;
  double c1_ratio_p2 = 0.0;
};

AssumptionReport check_assumptions(const BasicSequenceModel& model, const SpectralProfile& profile,
                                   const AssumptionOptions& options = {});

/// α together with the assumption checks, as the samplers consume them.
struct ModelAnalysis {
  SpectralProfile profile;
  AssumptionReport report;
};

ModelAnalysis analyze_model(const BasicSequenceModel& model, std::uint64_t seed,
                            std::size_t mc_budget = 200'000);

}  // namespace smoothfix
