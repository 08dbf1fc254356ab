// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include "smoothfix/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "smoothfix/wbp.hpp"

namespace smoothfix {
namespace {

constexpr double kClosedFormResidual = 1e-10;
constexpr double kDerivativeStep = 1e-6;

// Stream tags for the independent Monte Carlo pieces below.
constexpr std::uint64_t kTagMSample = 1;
constexpr std::uint64_t kTagMoments = 2;
constexpr std::uint64_t kTagTrajectory = 3;

Tri significance_sign(const MeanEstimate& est, double k_se) {
  if (est.possibly_infinite) return Tri::unknown;
  if (est.value + k_se * est.se < 0.0) return Tri::yes;
  if (est.value - k_se * est.se > 0.0) return Tri::no;
  return Tri::unknown;
}

struct TrajectoryVerdict {
  Tri bounded = Tri::unknown;
  double ratio = 0.0;
};

// Classify E|W*_k|^p, k = 0..depth, as bounded or growing from the increments
// over the last and the previous quarter-depth windows (same trees, so the
// increments carry little noise).
TrajectoryVerdict classify_trajectory(const std::vector<std::vector<double>>& partial_sums, std::uint32_t depth,
                                      double p) {
  const std::uint32_t late = depth;
  const std::uint32_t mid = depth - depth / 4;
  const std::uint32_t early = depth - depth / 2;
  MeanAccumulator d_late;
  MeanAccumulator d_early;
  for (const auto& sums : partial_sums) {
    // Trees that died early keep their last partial sum.
    auto at = [&](std::uint32_t k) { return std::pow(std::abs(sums[std::min<std::size_t>(k, sums.size() - 1)]), p); };
    d_late.add(at(late) - at(mid));
    d_early.add(at(mid) - at(early));
  }
  TrajectoryVerdict verdict;
  const double growth = d_late.mean();
  const double scale = std::max(1e-300, std::abs(d_early.mean()));
  verdict.ratio = growth / scale;
  if (growth <= 3.0 * d_late.se()) {
    verdict.bounded = Tri::yes;
  } else if (d_early.mean() > 0.0 && verdict.ratio < 0.75) {
    verdict.bounded = Tri::yes;
  } else if (verdict.ratio > 0.9) {
    verdict.bounded = Tri::no;
  }
  return verdict;
}

}  // namespace

MEvaluator::MEvaluator(const BasicSequenceModel& model, std::size_t mc_budget, std::uint64_t seed,
                       bool prefer_closed_form)
    : model_(&model), closed_form_(prefer_closed_form && model.has_closed_form_m()) {
  if (closed_form_) return;
  if (mc_budget == 0) throw InvalidArgument("Monte Carlo m requires a positive sample budget");
  CounterRng rng(tagged_seed(seed, kTagMSample));
  Realization r;
  offsets_.reserve(mc_budget + 1);
  offsets_.push_back(0);
  for (std::size_t i = 0; i < mc_budget; ++i) {
    model.draw_into(rng, r);
    for (double t : r.t) log_weights_.push_back(std::log(t));
    offsets_.push_back(static_cast<std::uint32_t>(log_weights_.size()));
  }
  draws_ = mc_budget;
}

MeanEstimate MEvaluator::m(double theta) const {
  if (closed_form_) {
    MeanEstimate est;
    est.value = model_->closed_form_m(theta);
    est.exact = true;
    return est;
  }
  MeanAccumulator acc;
  for (std::size_t i = 0; i < draws_; ++i) {
    double s = 0.0;
    for (auto k = offsets_[i]; k < offsets_[i + 1]; ++k) s += std::exp(theta * log_weights_[k]);
    acc.add(s);
  }
  return to_estimate(acc);
}

double MEvaluator::dm(double theta) const {
  if (closed_form_) return model_->closed_form_spectral(theta)->dm;
  const double lo = std::max(0.0, theta - kDerivativeStep);
  const double hi = theta + kDerivativeStep;
  return (m(hi).value - m(lo).value) / (hi - lo);
}

MeanEstimate eval_m(const BasicSequenceModel& model, double theta, std::size_t mc_budget, std::uint64_t seed) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw InvalidArgument("m(θ) requires finite θ >= 0");
  if (model.has_closed_form_m()) {
    MeanEstimate est;
    est.value = model.closed_form_m(theta);
    est.exact = true;
    return est;
  }
  if (mc_budget == 0) throw InvalidArgument("Monte Carlo m requires a positive sample budget");
  CounterRng rng(tagged_seed(seed, kTagMSample));
  Realization r;
  MeanAccumulator acc;
  for (std::size_t i = 0; i < mc_budget; ++i) {
    model.draw_into(rng, r);
    double s = 0.0;
    for (double t : r.t) s += std::pow(t, theta);
    acc.add(s);
  }
  return to_estimate(acc);
}

SpectralProfile find_alpha(const BasicSequenceModel& model, const SpectralOptions& options) {
  if (!(options.grid_step > 0.0) || !(options.theta_max > options.grid_step))
    throw InvalidArgument("scan grid needs 0 < step < theta_max");
  const MEvaluator ev(model, options.mc_budget, options.seed, options.prefer_closed_form);
  auto f = [&](double theta) { return ev.m(theta).value - 1.0; };

  const double m0 = f(0.0) + 1.0;
  if (!(m0 > 1.0)) {
    std::ostringstream msg;
    msg << "m(0) = E N = " << m0 << " <= 1; the branching is not supercritical";
    throw SpectralError(SpectralError::Kind::a2_violated, msg.str());
  }

  double lo = 0.0;
  double hi = -1.0;
  const auto steps = static_cast<std::size_t>(std::floor(options.theta_max / options.grid_step + 1e-9));
  for (std::size_t k = 1; k <= steps; ++k) {
    const double theta = static_cast<double>(k) * options.grid_step;
    if (f(theta) <= 0.0) {
      hi = theta;
      break;
    }
    lo = theta;
  }
  if (hi < 0.0)
    throw SpectralError(SpectralError::Kind::no_bracket,
                        "A3 unverifiable: m(θ) - 1 has no sign change on (0, theta_max]");

  double f_lo = f(lo);
  double f_hi = f(hi);
  for (int iter = 0; iter < 200 && f_hi != 0.0; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid > 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }

  SpectralProfile profile;
  profile.alpha = std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
  const MeanEstimate at_alpha = ev.m(profile.alpha);
  profile.m_alpha = at_alpha.value;
  profile.m_alpha_se = at_alpha.se;
  profile.residual = std::abs(at_alpha.value - 1.0);
  profile.closed_form = ev.closed_form();
  profile.mc_samples = ev.samples();
  profile.residual_bound = profile.closed_form ? kClosedFormResidual : std::max(3.0 * at_alpha.se, 1e-12);
  if (profile.residual > profile.residual_bound)
    throw SpectralError(SpectralError::Kind::no_bracket, "root refinement did not reach the residual bound");
  profile.m_prime_alpha = ev.dm(profile.alpha);
  profile.m_prime_negative = profile.m_prime_alpha < 0.0;

  profile.min_m_below_alpha = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 9; ++k)
    profile.min_m_below_alpha = std::min(profile.min_m_below_alpha, ev.m(profile.alpha * k / 10.0).value);
  if (!(profile.min_m_below_alpha > 1.0))
    throw SpectralError(SpectralError::Kind::a3_violated, "A3 violated: m(β) <= 1 for some β < α");
  return profile;
}

AssumptionReport check_assumptions(const BasicSequenceModel& model, const SpectralProfile& profile,
                                   const AssumptionOptions& options) {
  AssumptionReport report;
  std::ostringstream notes;
  const double alpha = profile.alpha;
  const auto closed = model.closed_form_spectral(alpha);

  switch (model.is_lattice()) {
    case Tri::yes: report.a1 = Tri::no; break;
    case Tri::no: report.a1 = Tri::yes; break;
    case Tri::unknown: report.a1 = Tri::unknown; break;
  }

  // One pass over fresh draws for every moment that needs sampling.
  constexpr int kBetaGrid = 20;
  MeanAccumulator n_acc, log_acc, llog_acc, a5_acc, m1_acc, abs_c_acc;
  std::vector<MeanAccumulator> c_beta(kBetaGrid), m_beta(kBetaGrid);
  CounterRng rng(tagged_seed(options.seed, kTagMoments));
  Realization r;
  for (std::size_t i = 0; i < options.mc_budget; ++i) {
    model.draw_into(rng, r);
    double s_alpha = 0.0, x_log = 0.0, x_a5 = 0.0, s1 = 0.0;
    for (double t : r.t) {
      const double ta = std::pow(t, alpha);
      const double lt = std::log(t);
      s_alpha += ta;
      x_log += ta * lt;
      if (lt < 0.0) x_a5 += ta * lt * lt;
      s1 += t;
    }
    n_acc.add(static_cast<double>(r.t.size()));
    log_acc.add(x_log);
    llog_acc.add(s_alpha > 1.0 ? s_alpha * std::log(s_alpha) : 0.0);
    a5_acc.add(x_a5);
    m1_acc.add(s1);
    abs_c_acc.add(std::abs(r.c));
    for (int k = 0; k < kBetaGrid; ++k) {
      const double beta = (k + 1) / static_cast<double>(kBetaGrid);
      c_beta[k].add(std::pow(std::abs(r.c), beta));
      double sb = 0.0;
      for (double t : r.t) sb += std::pow(t, beta);
      m_beta[k].add(sb);
    }
  }

  // A2, A3.
  report.m0 = closed ? model.closed_form_m(0.0) : n_acc.mean();
  report.a2 = report.m0 > 1.0;
  report.a3 = alpha > 0.0 && profile.residual <= profile.residual_bound && profile.min_m_below_alpha > 1.0;

  // A4a: E Σ T^α log T ∈ (-inf, 0) and E (Σ T^α) log+(Σ T^α) < inf.
  Tri negative_drift;
  if (closed) {
    report.log_moment = closed->dm;
    negative_drift = closed->dm < 0.0 ? Tri::yes : Tri::no;
  } else {
    const auto est = to_estimate(log_acc);
    report.log_moment = est.value;
    negative_drift = significance_sign(est, 3.0);
  }
  const auto llog = to_estimate(llog_acc);
  report.llog_moment = llog.value;
  const Tri llog_finite = llog.possibly_infinite ? Tri::unknown : Tri::yes;
  if (negative_drift == Tri::no)
    report.a4a = Tri::no;
  else if (negative_drift == Tri::yes && llog_finite == Tri::yes)
    report.a4a = Tri::yes;
  else
    report.a4a = Tri::unknown;

  // A4b: m finite somewhere on [0, α); m(0) = E N suffices.
  if (closed)
    report.a4b = std::isfinite(model.closed_form_m(0.0)) ? Tri::yes : Tri::no;
  else
    report.a4b = to_estimate(n_acc).possibly_infinite ? Tri::unknown : Tri::yes;

  // A5, implied by A4b.
  const auto a5 = to_estimate(a5_acc);
  report.a5_moment = a5.value;
  if (report.a4b == Tri::yes || (closed && std::isfinite(closed->d2m)))
    report.a5 = Tri::yes;
  else
    report.a5 = a5.possibly_infinite ? Tri::unknown : Tri::yes;

  // C2: m(β) < 1 and E|C|^β < inf for some 0 < β <= 1.
  report.c2 = closed ? Tri::no : Tri::unknown;
  for (int k = 0; k < kBetaGrid; ++k) {
    const double beta = (k + 1) / static_cast<double>(kBetaGrid);
    const bool c_finite = !model.supports_c() || !to_estimate(c_beta[k]).possibly_infinite;
    bool m_below;
    if (closed) {
      m_below = model.closed_form_m(beta) < 1.0;
    } else {
      const auto est = to_estimate(m_beta[k]);
      m_below = !est.possibly_infinite && est.value + 3.0 * est.se < 1.0;
    }
    if (m_below && c_finite) {
      report.c2 = Tri::yes;
      report.c2_beta = beta;
      break;
    }
  }

  // C1: m(1) < inf, E|C| < inf, and S^n(δ0) L^p-bounded for p = 1 or 2. The
  // boundedness part is a heuristic on the simulated moment trajectory.
  const bool m1_finite = closed ? std::isfinite(model.closed_form_m(1.0)) : !to_estimate(m1_acc).possibly_infinite;
  const bool c_abs_finite = !model.supports_c() || !to_estimate(abs_c_acc).possibly_infinite;
  if (!model.supports_c()) {
    report.c1 = m1_finite ? Tri::yes : Tri::unknown;
  } else if (!m1_finite || !c_abs_finite) {
    report.c1 = Tri::unknown;
  } else {
    std::vector<std::vector<double>> partial(options.c1_trees);
    GrowthOptions growth;
    for (std::size_t i = 0; i < options.c1_trees; ++i) {
      std::vector<double> level(options.c1_depth + 1, 0.0);
      visit_tree(model, options.c1_depth, split_seed(tagged_seed(options.seed, kTagTrajectory), i), growth,
                 [&](const NodeVisit& v) { level[v.depth] += v.L * v.C; });
      for (std::size_t k = 1; k < level.size(); ++k) level[k] += level[k - 1];
      partial[i] = std::move(level);
    }
    const auto p1 = classify_trajectory(partial, options.c1_depth, 1.0);
    const auto p2 = classify_trajectory(partial, options.c1_depth, 2.0);
    report.c1_ratio_p1 = p1.ratio;
    report.c1_ratio_p2 = p2.ratio;
    if (p1.bounded == Tri::yes || p2.bounded == Tri::yes)
      report.c1 = Tri::yes;
    else if (p1.bounded == Tri::no && p2.bounded == Tri::no)
      report.c1 = Tri::no;
    else
      report.c1 = Tri::unknown;
  }

  notes << "A1 from model metadata";
  if (!closed) notes << "; A4a/A4b/A5/C2 from " << options.mc_budget << " Monte Carlo draws";
  notes << "; C1 L^p-boundedness is a moment-trajectory heuristic over " << options.c1_trees
        << " trees of depth " << options.c1_depth << ", not a proof";
  if (llog.possibly_infinite) notes << "; E W1 log+ W1 possibly infinite";
  report.notes = notes.str();
  return report;
}

ModelAnalysis analyze_model(const BasicSequenceModel& model, std::uint64_t seed, std::size_t mc_budget) {
  SpectralOptions so;
  so.seed = seed;
  so.mc_budget = mc_budget;
  ModelAnalysis out;
  out.profile = find_alpha(model, so);
  AssumptionOptions ao;
  ao.seed = seed;
  ao.mc_budget = mc_budget;
  out.report = check_assumptions(model, out.profile, ao);
  return out;
}

}  // namespace smoothfix
