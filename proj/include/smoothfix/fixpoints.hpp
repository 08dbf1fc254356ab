// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

// Samplers for the endogenous fixed point W (limit of Biggins' martingale
// W_n = Σ_{|v|=n} L(v)^α) and the inhomogeneous series W*_n = Σ_{|v|<=n} L(v)C(v).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smoothfix/models.hpp"
#include "smoothfix/spectral.hpp"
#include "smoothfix/wbp.hpp"

namespace smoothfix {

struct SamplerOptions {
  std::uint32_t depth = 1;
  std::size_t batch = 1;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  /// weight_floor > 0 truncates subtrees with L(v) below it; see LevelSums.
  GrowthOptions growth;
};

struct SampleBatch {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string model;
  std::string quantity;
  std::uint32_t depth = 0;
  double mean = 0.0;
  double se = 0.0;
  /// Convergence diagnostic; its meaning is named by diagnostic_label.
  double diagnostic = 0.0;
  std::string diagnostic_label;
  /// Largest Σ L(v)^2 over pruned nodes among the batch's trees (0 when exact).
  double omitted_l2 = 0.0;
};

struct CoupledBatch {
  std::vector<double> wstar;
  std::vector<double> w;
  std::uint64_t seed = 0;
  std::uint32_t depth = 0;
  std::string model;
  double omitted_l2 = 0.0;

  std::size_t size() const noexcept { return w.size(); }
};

/// Per-generation sums of one tree: lc[k] = Σ_{|v|=k} L(v)C(v) and
/// lalpha[k] = Σ_{|v|=k} L(v)^α. A node pruned by the weight floor at depth d
/// contributes its own term, and L(v)^α (the conditional mean of its subtree)
/// to every lalpha[k], k > d; its descendants' C terms are omitted and
/// omitted_l2 accumulates L(v)^2 for them.
struct LevelSums {
  std::vector<double> lc;
  std::vector<double> lalpha;
  std::vector<std::size_t> count;
  double omitted_l2 = 0.0;
  std::size_t nodes = 0;
};

LevelSums level_sums(const BasicSequenceModel& model, double alpha, std::uint32_t depth, std::uint64_t tree_seed,
                     const GrowthOptions& growth, bool need_c = true);

/// Seed of the i-th tree of a batch; shared by every sampler so that samples
/// with the same (seed, i) come from the same tree.
std::uint64_t batch_tree_seed(std::uint64_t seed, std::size_t index) noexcept;

/// Biggins martingale W_n^{(α)} at n = depth on independent trees. Requires
/// A4a = true.
SampleBatch sample_W(const BasicSequenceModel& model, const SpectralProfile& profile,
                     const AssumptionReport& report, const SamplerOptions& options);

/// W*_depth on independent trees. Refuses when both C1 and C2 are false
/// (unless C ≡ 0).
SampleBatch sample_Wstar(const BasicSequenceModel& model, const AssumptionReport& report,
                         const SamplerOptions& options);

/// (W*_n, W_n) from the same tree for each pair.
CoupledBatch sample_coupled(const BasicSequenceModel& model, const SpectralProfile& profile,
                            const AssumptionReport& report, const SamplerOptions& options);

enum class Drift { decreasing, flat, increasing };
std::string_view to_string(Drift drift) noexcept;

struct MartingaleRow {
  std::uint32_t depth;
  double wstar_mean;
  double wstar_se;
  double w_mean;
  double w_se;
};

struct MartingaleReport {
  std::vector<MartingaleRow> rows;
  /// Mean of W*_n - W*_{n-1} per level between the smallest and largest depth.
  double drift_per_level = 0.0;
  double drift_se = 0.0;
  Drift drift = Drift::flat;
  /// Drift flagged at 4 SE.
  static constexpr double kDriftSe = 4.0;
};

/// Batch means of W*_n and W_n at each requested depth, all from the same
/// trees, with the drift direction of W*.
MartingaleReport martingale_report(const BasicSequenceModel& model, const SpectralProfile& profile,
                                   std::vector<std::uint32_t> depths, std::size_t batch, std::uint64_t seed,
                                   unsigned workers = 1);

/// Batch mean and SE helper.
void summarize(SampleBatch& batch);

}  // namespace smoothfix
