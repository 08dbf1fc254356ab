// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include "smoothfix/stable.hpp"

#include <cmath>
#include <numbers>

#include "smoothfix/error.hpp"
#include "smoothfix/stats.hpp"

namespace smoothfix {
namespace {

constexpr double kRegimeTolerance = 1e-8;
constexpr std::uint64_t kTagStableDraws = 0x737461626c65ull;  // "stable"

using namespace std::complex_literals;

inline double sgn(double t) { return (t > 0.0) - (t < 0.0); }

}  // namespace

void StableParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw InvalidArgument("stable index α must lie in (0, 2]");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("stable scale σ must be finite and >= 0");
  if (!(beta >= -1.0 && beta <= 1.0)) throw InvalidArgument("stable skewness β must lie in [-1, 1]");
  if (!std::isfinite(mu)) throw InvalidArgument("stable shift μ must be finite");
  if (alpha == 2.0 && beta != 0.0) throw InvalidArgument("β must be 0 when α = 2");
}

std::complex<double> stable_psi(const StableParams& p, double t) {
  if (t == 0.0) return {0.0, 0.0};
  const double at = std::abs(t);
  if (p.alpha == 1.0) {
    return 1i * (p.mu * t) - p.sigma * at * (1.0 + 1i * (p.beta * sgn(t) * (2.0 / std::numbers::pi) * std::log(at)));
  }
  if (p.alpha == 2.0) return 1i * (p.mu * t) - p.sigma * p.sigma * t * t;
  const double scale = std::pow(p.sigma * at, p.alpha);
  return 1i * (p.mu * t) - scale * (1.0 - 1i * (p.beta * sgn(t) * std::tan(std::numbers::pi * p.alpha / 2.0)));
}

double draw_stable(const StableParams& p, CounterRng& rng) {
  // Chambers, Mallows & Stuck (1976) in the form given by Weron (1996),
  // which lands directly on the parametrization of stable_psi.
  const double v = std::numbers::pi * (rng.uniform() - 0.5);
  if (p.alpha == 1.0) {
    if (p.beta != 0.0) throw InvalidArgument("α = 1 sampling supports β = 0 only");
    return p.sigma * std::tan(v) + p.mu;
  }
  const double w = rng.exponential();
  const double a = p.alpha;
  const double tan_term = p.beta * std::tan(std::numbers::pi * a / 2.0);
  const double b = std::atan(tan_term) / a;
  const double s = std::pow(1.0 + tan_term * tan_term, 1.0 / (2.0 * a));
  const double x = s * std::sin(a * (v + b)) / std::pow(std::cos(v), 1.0 / a) *
                   std::pow(std::cos(v - a * (v + b)) / w, (1.0 - a) / a);
  return p.sigma * x + p.mu;
}

std::vector<double> sample_stable(const StableParams& p, std::size_t n, std::uint64_t seed) {
  p.validate();
  if (p.alpha == 1.0 && p.beta != 0.0) throw InvalidArgument("α = 1 sampling supports β = 0 only");
  CounterRng rng(tagged_seed(seed, kTagStableDraws));
  std::vector<double> out(n);
  for (auto& x : out) x = draw_stable(p, rng);
  return out;
}

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::alpha_ne_1_2: return "alpha_ne_1_2";
    case Regime::alpha_eq_2: return "alpha_eq_2";
    case Regime::alpha_eq_1: break;
  }
  return "alpha_eq_1";
}

Regime parse_regime(std::string_view text) {
  if (text == "alpha_ne_1_2") return Regime::alpha_ne_1_2;
  if (text == "alpha_eq_1") return Regime::alpha_eq_1;
  if (text == "alpha_eq_2") return Regime::alpha_eq_2;
  throw InvalidArgument("unknown regime '" + std::string(text) + "'");
}

Regime regime_for_alpha(double alpha) {
  if (std::abs(alpha - 1.0) <= kRegimeTolerance) return Regime::alpha_eq_1;
  if (std::abs(alpha - 2.0) <= kRegimeTolerance) return Regime::alpha_eq_2;
  return Regime::alpha_ne_1_2;
}

void SolutionSpec::validate(double alpha) const {
  if (!(alpha > 0.0) || alpha > 2.0 + kRegimeTolerance)
    throw InvalidArgument("characteristic exponent α must lie in (0, 2] for a stable mixture");
  if (regime != regime_for_alpha(alpha))
    throw InvalidArgument("regime " + std::string(to_string(regime)) + " does not match the model's α = " +
                          std::to_string(alpha));
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("σ must be finite and >= 0");
  if (!std::isfinite(mu)) throw InvalidArgument("μ must be finite");
  if (regime != Regime::alpha_eq_1 && mu != 0.0) throw InvalidArgument("μ is a parameter of the α = 1 family only");
  if (regime != Regime::alpha_ne_1_2 && beta != 0.0)
    throw InvalidArgument("β is a parameter of the α ∉ {1, 2} family only");
  if (!(beta >= -1.0 && beta <= 1.0)) throw InvalidArgument("β must lie in [-1, 1]");
  if (inhomogeneous) return;
  if (regime == Regime::alpha_eq_1) {
    if (mu == 0.0 && sigma == 0.0) throw InvalidArgument("(μ, σ) = (0, 0) gives δ0, which is excluded");
  } else if (!(sigma > 0.0)) {
    throw InvalidArgument("the homogeneous family requires σ > 0");
  }
}

std::complex<double> solution_cf_term(const SolutionSpec& spec, double alpha, double wstar, double w, double t) {
  const double shift = spec.inhomogeneous ? wstar : 0.0;
  const double at = std::abs(t);
  switch (spec.regime) {
    case Regime::alpha_eq_1:
      return std::exp(1i * ((shift + spec.mu * w) * t) - spec.sigma * w * at);
    case Regime::alpha_eq_2:
      return std::exp(1i * (shift * t) - spec.sigma * spec.sigma * w * t * t);
    case Regime::alpha_ne_1_2:
      break;
  }
  const double scale = std::pow(spec.sigma * at, alpha) * w;
  const double skew = spec.beta * sgn(t) * std::tan(std::numbers::pi * alpha / 2.0);
  return std::exp(1i * (shift * t) - scale * (1.0 - 1i * skew));
}

CfEstimate solution_cf(const SolutionSpec& spec, double alpha, const CoupledBatch& coupled, double t) {
  if (coupled.size() == 0) throw InvalidArgument("solution_cf needs a non-empty coupled batch");
  MeanAccumulator re, im;
  for (std::size_t i = 0; i < coupled.size(); ++i) {
    const auto z = solution_cf_term(spec, alpha, coupled.wstar[i], coupled.w[i], t);
    re.add(z.real());
    im.add(z.imag());
  }
  return {{re.mean(), im.mean()}, re.se(), im.se()};
}

CoupledBatch solution_pairs(const SolutionSpec& spec, const SpectralProfile& profile,
                            const AssumptionReport& report, std::size_t batch, std::uint64_t seed,
                            unsigned workers) {
  spec.validate(profile.alpha);
  SamplerOptions opts;
  opts.depth = spec.depth;
  opts.batch = batch;
  opts.seed = seed;
  opts.workers = workers;
  opts.growth.weight_floor = spec.weight_floor;
  if (spec.inhomogeneous) return sample_coupled(spec.model, profile, report, opts);
  const auto w = sample_W(spec.model, profile, report, opts);
  CoupledBatch out;
  out.w = w.values;
  out.wstar.assign(w.values.size(), 0.0);
  out.seed = seed;
  out.depth = spec.depth;
  out.model = w.model;
  out.omitted_l2 = w.omitted_l2;
  return out;
}

std::vector<double> solution_from_pairs(const SolutionSpec& spec, double alpha, const CoupledBatch& pairs,
                                        std::uint64_t seed) {
  StableParams y;
  y.alpha = spec.regime == Regime::alpha_eq_1 ? 1.0 : spec.regime == Regime::alpha_eq_2 ? 2.0 : alpha;
  y.sigma = spec.sigma;
  y.beta = spec.regime == Regime::alpha_ne_1_2 ? spec.beta : 0.0;
  y.mu = 0.0;
  y.validate();
  CounterRng rng(tagged_seed(seed, kTagStableDraws));
  std::vector<double> out(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double w = pairs.w[i];
    double x = spec.inhomogeneous ? pairs.wstar[i] : 0.0;
    if (spec.regime == Regime::alpha_eq_1) x += spec.mu * w;
    if (spec.sigma > 0.0) x += std::pow(w, 1.0 / y.alpha) * draw_stable(y, rng);
    out[i] = x;
  }
  return out;
}

SampleBatch solution_sample(const SolutionSpec& spec, const SpectralProfile& profile,
                            const AssumptionReport& report, std::size_t batch, std::uint64_t seed,
                            unsigned workers) {
  const auto pairs = solution_pairs(spec, profile, report, batch, seed, workers);
  SampleBatch out;
  out.values = solution_from_pairs(spec, profile.alpha, pairs, seed);
  out.seed = seed;
  out.model = pairs.model;
  out.quantity = "X";
  out.depth = spec.depth;
  out.omitted_l2 = pairs.omitted_l2;
  summarize(out);
  return out;
}

}  // namespace smoothfix
