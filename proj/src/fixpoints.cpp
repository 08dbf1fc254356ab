// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include "smoothfix/fixpoints.hpp"

#include <algorithm>
#include <cmath>

#include "smoothfix/error.hpp"
#include "smoothfix/parallel.hpp"
#include "smoothfix/stats.hpp"

namespace smoothfix {
namespace {

constexpr std::uint64_t kTagBatchTrees = 0x7472656573ull;  // "trees"

inline double weight_power(double l, double alpha) {
  if (alpha == 1.0) return l;
  if (alpha == 0.5) return std::sqrt(l);
  if (alpha == 2.0) return l * l;
  return std::pow(l, alpha);
}

void require_depth(const SamplerOptions& options, std::uint32_t min_depth) {
  if (options.depth < min_depth) throw InvalidArgument("sampler depth must be >= " + std::to_string(min_depth));
  if (options.batch == 0) throw InvalidArgument("batch size must be positive");
}

void gate_w(const AssumptionReport& report) {
  if (report.a4a != Tri::yes)
    throw PreconditionError(
        "W sampling needs A4a (E Σ T^α log T in (-inf,0) and E W1 log+ W1 < inf) to hold; A4a is " +
        std::string(to_string(report.a4a)) +
        ". The boundary case requires Seneta-Heyde norming, which is out of scope.");
}

void gate_wstar(const BasicSequenceModel& model, const AssumptionReport& report) {
  if (model.supports_c() && report.c1 == Tri::no && report.c2 == Tri::no)
    throw PreconditionError("W* sampling needs C1 or C2; both are false for model '" + model.name() + "'");
}

}  // namespace

std::uint64_t batch_tree_seed(std::uint64_t seed, std::size_t index) noexcept {
  return split_seed(tagged_seed(seed, kTagBatchTrees), index);
}

void summarize(SampleBatch& batch) {
  MeanAccumulator acc;
  for (double v : batch.values) acc.add(v);
  batch.mean = acc.mean();
  batch.se = acc.se();
}

std::string_view to_string(Drift drift) noexcept {
  switch (drift) {
    case Drift::decreasing: return "decreasing";
    case Drift::increasing: return "increasing";
    case Drift::flat: break;
  }
  return "flat";
}

LevelSums level_sums(const BasicSequenceModel& model, double alpha, std::uint32_t depth, std::uint64_t tree_seed,
                     const GrowthOptions& growth, bool need_c) {
  LevelSums sums;
  sums.lc.assign(depth + 1, 0.0);
  sums.lalpha.assign(depth + 1, 0.0);
  sums.count.assign(depth + 1, 0);
  GrowthOptions opts = growth;
  opts.frontier_draws = need_c;
  sums.nodes = visit_tree(model, depth, tree_seed, opts, [&](const NodeVisit& v) {
    const double la = weight_power(v.L, alpha);
    sums.lalpha[v.depth] += la;
    ++sums.count[v.depth];
    if (need_c) sums.lc[v.depth] += v.L * v.C;
    if (v.pruned) {
      for (std::uint32_t k = v.depth + 1; k <= depth; ++k) sums.lalpha[k] += la;
      sums.omitted_l2 += v.L * v.L;
    }
  });
  return sums;
}

SampleBatch sample_W(const BasicSequenceModel& model, const SpectralProfile& profile,
                     const AssumptionReport& report, const SamplerOptions& options) {
  gate_w(report);
  require_depth(options, 1);
  SampleBatch out;
  out.values.resize(options.batch);
  std::vector<double> step(options.batch);
  std::vector<double> omitted(options.batch);
  parallel_for(options.batch, options.workers, [&](std::size_t i) {
    const auto sums =
        level_sums(model, profile.alpha, options.depth, batch_tree_seed(options.seed, i), options.growth, false);
    out.values[i] = sums.lalpha[options.depth];
    step[i] = std::abs(sums.lalpha[options.depth] - sums.lalpha[options.depth - 1]);
    omitted[i] = sums.omitted_l2;
  });
  out.seed = options.seed;
  out.model = model.spec_string();
  out.quantity = "W";
  out.depth = options.depth;
  out.diagnostic = mean(step);
  out.diagnostic_label = "mean |W_n - W_{n-1}|";
  out.omitted_l2 = omitted.empty() ? 0.0 : *std::max_element(omitted.begin(), omitted.end());
  summarize(out);
  return out;
}

SampleBatch sample_Wstar(const BasicSequenceModel& model, const AssumptionReport& report,
                         const SamplerOptions& options) {
  gate_wstar(model, report);
  require_depth(options, 0);
  SampleBatch out;
  out.values.assign(options.batch, 0.0);
  std::vector<double> step(options.batch, 0.0);
  std::vector<double> omitted(options.batch, 0.0);
  if (model.supports_c()) {
    parallel_for(options.batch, options.workers, [&](std::size_t i) {
      const auto sums = level_sums(model, 1.0, options.depth, batch_tree_seed(options.seed, i), options.growth);
      double total = 0.0;
      for (double x : sums.lc) total += x;
      out.values[i] = total;
      step[i] = sums.lc[options.depth];
      omitted[i] = sums.omitted_l2;
    });
  }
  out.seed = options.seed;
  out.model = model.spec_string();
  out.quantity = "Wstar";
  out.depth = options.depth;
  out.diagnostic = mean(step);
  out.diagnostic_label = "mean (W*_n - W*_{n-1})";
  out.omitted_l2 = omitted.empty() ? 0.0 : *std::max_element(omitted.begin(), omitted.end());
  summarize(out);
  return out;
}

CoupledBatch sample_coupled(const BasicSequenceModel& model, const SpectralProfile& profile,
                            const AssumptionReport& report, const SamplerOptions& options) {
  gate_w(report);
  gate_wstar(model, report);
  require_depth(options, 1);
  CoupledBatch out;
  out.wstar.assign(options.batch, 0.0);
  out.w.assign(options.batch, 0.0);
  std::vector<double> omitted(options.batch, 0.0);
  const bool need_c = model.supports_c();
  parallel_for(options.batch, options.workers, [&](std::size_t i) {
    const auto sums =
        level_sums(model, profile.alpha, options.depth, batch_tree_seed(options.seed, i), options.growth, need_c);
    double total = 0.0;
    for (double x : sums.lc) total += x;
    out.wstar[i] = total;
    out.w[i] = sums.lalpha[options.depth];
    omitted[i] = sums.omitted_l2;
  });
  out.seed = options.seed;
  out.depth = options.depth;
  out.model = model.spec_string();
  out.omitted_l2 = omitted.empty() ? 0.0 : *std::max_element(omitted.begin(), omitted.end());
  return out;
}

MartingaleReport martingale_report(const BasicSequenceModel& model, const SpectralProfile& profile,
                                   std::vector<std::uint32_t> depths, std::size_t batch, std::uint64_t seed,
                                   unsigned workers) {
  if (depths.empty()) throw InvalidArgument("martingale report needs at least one depth");
  if (batch < 2) throw InvalidArgument("martingale report needs a batch of at least 2 trees");
  std::sort(depths.begin(), depths.end());
  depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
  const std::uint32_t max_depth = depths.back();
  const std::uint32_t min_depth = depths.size() > 1 ? depths.front() : 0;

  // Per tree: partial sums of W* and the generation sums of L^α, by depth.
  std::vector<std::vector<double>> wstar(batch), w(batch);
  parallel_for(batch, workers, [&](std::size_t i) {
    const auto sums = level_sums(model, profile.alpha, max_depth, batch_tree_seed(seed, i), GrowthOptions{});
    std::vector<double> partial(sums.lc);
    for (std::size_t k = 1; k < partial.size(); ++k) partial[k] += partial[k - 1];
    wstar[i] = std::move(partial);
    w[i] = sums.lalpha;
  });

  MartingaleReport report;
  for (auto d : depths) {
    MeanAccumulator ws, ww;
    for (std::size_t i = 0; i < batch; ++i) {
      ws.add(wstar[i][d]);
      ww.add(w[i][d]);
    }
    report.rows.push_back({d, ws.mean(), ws.se(), ww.mean(), ww.se()});
  }
  if (max_depth > min_depth) {
    MeanAccumulator slope;
    for (std::size_t i = 0; i < batch; ++i)
      slope.add((wstar[i][max_depth] - wstar[i][min_depth]) / static_cast<double>(max_depth - min_depth));
    report.drift_per_level = slope.mean();
    report.drift_se = slope.se();
    if (report.drift_per_level > MartingaleReport::kDriftSe * report.drift_se)
      report.drift = Drift::increasing;
    else if (report.drift_per_level < -MartingaleReport::kDriftSe * report.drift_se)
      report.drift = Drift::decreasing;
  }
  return report;
}

}  // namespace smoothfix
