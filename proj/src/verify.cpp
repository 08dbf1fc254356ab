// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include "smoothfix/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "smoothfix/error.hpp"
#include "smoothfix/parallel.hpp"
#include "smoothfix/rng.hpp"
#include "smoothfix/stats.hpp"
#include "smoothfix/wbp.hpp"

namespace smoothfix {
namespace {

using namespace std::complex_literals;

constexpr std::uint64_t kTagPermutations = 0x7065726dull;     // "perm"
constexpr std::uint64_t kTagTransform = 0x7866726dull;        // "xfrm"
constexpr std::uint64_t kTagTest = 0x74657374ull;             // "test"
constexpr std::uint64_t kTagDisintegration = 0x64697374ull;   // "dist"

// Σ_{i<j} |z_j - z_i| over the members of one group, z sorted ascending.
// With r the 1-based rank inside the group this is Σ z (2r - 1 - n).
struct PairSums {
  long double aa = 0.0L;
  long double bb = 0.0L;
};

PairSums group_pair_sums(std::span<const double> sorted, std::span<const std::uint8_t> in_a, std::size_t n_a) {
  const std::size_t n_b = sorted.size() - n_a;
  long double aa = 0.0L, bb = 0.0L;
  std::size_t ra = 0, rb = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const long double z = sorted[k];
    if (in_a[k]) {
      ++ra;
      aa += z * (2.0L * static_cast<long double>(ra) - 1.0L - static_cast<long double>(n_a));
    } else {
      ++rb;
      bb += z * (2.0L * static_cast<long double>(rb) - 1.0L - static_cast<long double>(n_b));
    }
  }
  return {aa, bb};
}

double energy_from_sums(long double total, const PairSums& s, std::size_t n, std::size_t m) {
  const long double ab = total - s.aa - s.bb;
  const long double ln = static_cast<long double>(n), lm = static_cast<long double>(m);
  const long double e = 2.0L * ab / (ln * lm) - 2.0L * s.aa / (ln * ln) - 2.0L * s.bb / (lm * lm);
  return static_cast<double>(ln * lm / (ln + lm) * e);
}

// Pooled sample prepared once for all permutations.
class PooledSample {
 public:
  PooledSample(std::span<const double> a, std::span<const double> b, Statistic statistic,
               std::span<const double> grid)
      : n_(a.size()), m_(b.size()), statistic_(statistic), grid_(grid.begin(), grid.end()) {
    std::vector<std::pair<double, std::uint8_t>> pool;
    pool.reserve(n_ + m_);
    for (double x : a) pool.emplace_back(x, 1);
    for (double x : b) pool.emplace_back(x, 0);
    if (statistic_ == Statistic::energy)
      std::stable_sort(pool.begin(), pool.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    values_.reserve(pool.size());
    labels_.reserve(pool.size());
    for (const auto& [x, label] : pool) {
      values_.push_back(x);
      labels_.push_back(label);
    }
    if (statistic_ == Statistic::energy) {
      std::vector<std::uint8_t> all(values_.size(), 1);
      total_ = group_pair_sums(values_, all, values_.size()).aa;
    } else {
      cos_.resize(grid_.size() * values_.size());
      sin_.resize(grid_.size() * values_.size());
      for (std::size_t g = 0; g < grid_.size(); ++g) {
        for (std::size_t k = 0; k < values_.size(); ++k) {
          cos_[g * values_.size() + k] = std::cos(grid_[g] * values_[k]);
          sin_[g * values_.size() + k] = std::sin(grid_[g] * values_[k]);
        }
      }
      cos_total_.assign(grid_.size(), 0.0L);
      sin_total_.assign(grid_.size(), 0.0L);
      for (std::size_t g = 0; g < grid_.size(); ++g) {
        for (std::size_t k = 0; k < values_.size(); ++k) {
          cos_total_[g] += cos_[g * values_.size() + k];
          sin_total_[g] += sin_[g * values_.size() + k];
        }
      }
    }
  }

  const std::vector<std::uint8_t>& labels() const noexcept { return labels_; }

  double statistic(std::span<const std::uint8_t> in_a) const {
    if (statistic_ == Statistic::energy) return energy_from_sums(total_, group_pair_sums(values_, in_a, n_), n_, m_);
    double best = 0.0;
    const std::size_t size = values_.size();
    for (std::size_t g = 0; g < grid_.size(); ++g) {
      long double ca = 0.0L, sa = 0.0L;
      const double* c = &cos_[g * size];
      const double* s = &sin_[g * size];
      for (std::size_t k = 0; k < size; ++k) {
        if (in_a[k]) {
          ca += c[k];
          sa += s[k];
        }
      }
      const long double cb = cos_total_[g] - ca, sb = sin_total_[g] - sa;
      const long double ln = static_cast<long double>(n_), lm = static_cast<long double>(m_);
      const double dr = static_cast<double>(ca / ln - cb / lm);
      const double di = static_cast<double>(sa / ln - sb / lm);
      best = std::max(best, std::hypot(dr, di));
    }
    return best;
  }

 private:
  std::size_t n_, m_;
  Statistic statistic_;
  std::vector<double> grid_;
  std::vector<double> values_;
  std::vector<std::uint8_t> labels_;
  long double total_ = 0.0L;
  std::vector<double> cos_, sin_;
  std::vector<long double> cos_total_, sin_total_;
};

double limit_exponent_derivative(const SolutionSpec& spec, double alpha, double shift, double w, double t,
                                 std::complex<double>* out) {
  // Derivative in t > 0 of the exponent of solution_cf_term; returns 0 and
  // leaves *out untouched when it is unbounded (α < 1 at t = 0).
  switch (spec.regime) {
    case Regime::alpha_eq_1:
      *out = 1i * (shift + spec.mu * w) - spec.sigma * w;
      return 1.0;
    case Regime::alpha_eq_2:
      *out = 1i * shift - 2.0 * spec.sigma * spec.sigma * w * t;
      return 1.0;
    case Regime::alpha_ne_1_2:
      break;
  }
  if (t == 0.0 && alpha < 1.0 && spec.sigma > 0.0) return 0.0;
  const double skew = spec.beta * std::tan(std::numbers::pi * alpha / 2.0);
  const double scale = t == 0.0 ? 0.0 : alpha * std::pow(spec.sigma, alpha) * std::pow(t, alpha - 1.0) * w;
  *out = 1i * shift - scale * (1.0 - 1i * skew);
  return 1.0;
}

void check_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw InvalidArgument("t grid must not be empty");
  for (double t : t_grid)
    if (!std::isfinite(t)) throw InvalidArgument("t grid contains a non-finite value");
}

double max_abs(std::span<const double> t_grid) {
  double r = 0.0;
  for (double t : t_grid) r = std::max(r, std::abs(t));
  return r;
}

// Φ_n(t_k) for n = 0..depth_max on one tree, plus W_n and W*_{n-1}.
struct TreeTrace {
  std::vector<std::vector<std::complex<double>>> phi;  // [n][k]
  std::vector<double> w;                               // W_n
  std::vector<double> wstar_prev;                      // W*_{n-1}
};

TreeTrace trace_tree(const SolutionSpec& spec, double alpha, const CharacteristicFunction& phi,
                     std::uint32_t depth_max, std::span<const double> t_grid, std::uint64_t tree_seed) {
  const std::size_t k_count = t_grid.size();
  std::vector<std::vector<std::complex<double>>> prod(depth_max + 1,
                                                      std::vector<std::complex<double>>(k_count, 1.0));
  std::vector<double> lalpha(depth_max + 1, 0.0), lc(depth_max + 1, 0.0);
  GrowthOptions growth;
  growth.frontier_draws = false;
  const bool use_c = spec.inhomogeneous && spec.model.supports_c();
  visit_tree(spec.model, depth_max, tree_seed, growth, [&](const NodeVisit& v) {
    lalpha[v.depth] += alpha == 1.0 ? v.L : std::pow(v.L, alpha);
    if (use_c && v.depth < depth_max) lc[v.depth] += v.L * v.C;
    auto& row = prod[v.depth];
    for (std::size_t k = 0; k < k_count; ++k)
      if (t_grid[k] != 0.0) row[k] *= phi(v.L * t_grid[k]);
  });
  TreeTrace out;
  out.w = lalpha;
  out.wstar_prev.assign(depth_max + 1, 0.0);
  for (std::uint32_t n = 1; n <= depth_max; ++n) out.wstar_prev[n] = out.wstar_prev[n - 1] + lc[n - 1];
  if (use_c) {
    for (std::uint32_t n = 1; n <= depth_max; ++n)
      for (std::size_t k = 0; k < k_count; ++k) prod[n][k] *= std::exp(1i * (out.wstar_prev[n] * t_grid[k]));
  }
  out.phi = std::move(prod);
  return out;
}

}  // namespace

std::string_view to_string(Statistic s) noexcept { return s == Statistic::ecf ? "ecf" : "energy"; }

Statistic parse_statistic(std::string_view text) {
  if (text == "energy") return Statistic::energy;
  if (text == "ecf") return Statistic::ecf;
  throw InvalidArgument("unknown test statistic '" + std::string(text) + "' (expected energy or ecf)");
}

double energy_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("energy statistic needs two non-empty samples");
  PooledSample pool(a, b, Statistic::energy, {});
  return pool.statistic(pool.labels());
}

double ecf_statistic(std::span<const double> a, std::span<const double> b, std::span<const double> grid) {
  if (a.empty() || b.empty()) throw InvalidArgument("ECF statistic needs two non-empty samples");
  if (grid.empty()) throw InvalidArgument("ECF statistic needs a non-empty grid");
  PooledSample pool(a, b, Statistic::ecf, grid);
  return pool.statistic(pool.labels());
}

TestReport two_sample_test(std::span<const double> a, std::span<const double> b, std::uint64_t seed,
                           const TestOptions& options) {
  if (a.empty() || b.empty()) throw InvalidArgument("two-sample test needs two non-empty samples");
  if (options.n_perm == 0) throw InvalidArgument("permutation count must be positive");
  if (!(options.level > 0.0 && options.level < 1.0)) throw InvalidArgument("test level must lie in (0, 1)");
  if (options.statistic == Statistic::ecf && options.ecf_grid.empty())
    throw InvalidArgument("ECF statistic needs a non-empty grid");
  for (double x : a)
    if (!std::isfinite(x)) throw InvalidArgument("sample contains a non-finite value");
  for (double x : b)
    if (!std::isfinite(x)) throw InvalidArgument("sample contains a non-finite value");

  const PooledSample pool(a, b, options.statistic, options.ecf_grid);
  const double observed = pool.statistic(pool.labels());

  const std::uint64_t perm_seed = tagged_seed(seed, kTagPermutations);
  std::vector<std::uint8_t> exceed(options.n_perm, 0);
  parallel_for(options.n_perm, options.workers, [&](std::size_t p) {
    std::vector<std::uint8_t> labels = pool.labels();
    CounterRng rng(perm_seed, p);
    for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);
    exceed[p] = pool.statistic(labels) >= observed;
  });

  TestReport report;
  report.statistic = observed;
  report.n_permutations = options.n_perm;
  const auto count = std::accumulate(exceed.begin(), exceed.end(), std::size_t{0});
  report.pvalue = static_cast<double>(1 + count) / static_cast<double>(options.n_perm + 1);
  report.level = options.level;
  report.pass = report.pvalue > options.level;
  report.statistic_name = to_string(options.statistic);
  report.n1 = a.size();
  report.n2 = b.size();
  report.seed = seed;
  return report;
}

std::vector<double> apply_transform(const BasicSequenceModel& model, std::span<const double> x, std::size_t count,
                                    std::uint64_t seed) {
  if (x.empty()) throw InvalidArgument("apply_transform needs a non-empty input sample");
  CounterRng rng(tagged_seed(seed, kTagTransform));
  Realization r;
  std::vector<double> out(count);
  for (auto& y : out) {
    model.draw_into(rng, r);
    double v = r.c;
    for (double t : r.t) v += t * x[rng.below(x.size())];
    y = v;
  }
  return out;
}

TestReport fixed_point_test(const BasicSequenceModel& model, std::span<const double> candidate, std::size_t n,
                            std::uint64_t seed, const TestOptions& options) {
  if (n < 500) throw InvalidArgument("fixed-point test needs n >= 500");
  if (candidate.size() < n) throw InvalidArgument("fixed-point test needs at least n candidate samples");
  const auto compare = candidate.first(n);
  const auto pool = candidate.size() >= 2 * n ? candidate.subspan(n) : candidate;
  const auto transformed = apply_transform(model, pool, n, seed);
  return two_sample_test(compare, transformed, tagged_seed(seed, kTagTest), options);
}

Statistic auto_statistic(const SolutionSpec& spec, double alpha) noexcept {
  return spec.sigma > 0.0 && alpha <= 1.0 + 1e-8 ? Statistic::ecf : Statistic::energy;
}

TabulatedCF::TabulatedCF(const SolutionSpec& spec, double alpha, const CoupledBatch& pairs, double t_max,
                         std::size_t intervals)
    : spec_(spec), alpha_(alpha), wstar_(pairs.wstar), w_(pairs.w), t_max_(t_max) {
  if (pairs.size() == 0) throw InvalidArgument("tabulated CF needs a non-empty coupled batch");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidArgument("tabulation range must be finite and positive");
  if (intervals == 0) throw InvalidArgument("tabulation needs at least one interval");
  step_ = t_max / static_cast<double>(intervals);
  values_.resize(intervals + 1);
  slopes_.resize(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k)
    values_[k] = exact_with_derivative(static_cast<double>(k) * step_, &slopes_[k]);
  // |t|^α has unbounded higher derivatives at 0 for α ∉ {1, 2}, so the cubic
  // is only accurate away from the origin.
  const bool kink = spec.sigma > 0.0 && spec.regime == Regime::alpha_ne_1_2;
  if (kink || std::isnan(slopes_[0].real()))
    exact_below_ = std::min(t_max, static_cast<double>(kink ? kExactIntervals : 1) * step_);
}

std::complex<double> TabulatedCF::exact_with_derivative(double t, std::complex<double>* derivative) const {
  std::complex<double> sum = 0.0, dsum = 0.0;
  bool smooth = true;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    const auto z = solution_cf_term(spec_, alpha_, wstar_[i], w_[i], t);
    sum += z;
    if (derivative) {
      std::complex<double> e;
      const double shift = spec_.inhomogeneous ? wstar_[i] : 0.0;
      if (limit_exponent_derivative(spec_, alpha_, shift, w_[i], t, &e) == 0.0)
        smooth = false;
      else
        dsum += e * z;
    }
  }
  const double scale = 1.0 / static_cast<double>(w_.size());
  if (derivative) *derivative = smooth ? dsum * scale : std::complex<double>(std::nan(""), 0.0);
  return sum * scale;
}

std::complex<double> TabulatedCF::exact(double t) const {
  if (t < 0.0) return std::conj(exact(-t));
  return exact_with_derivative(t, nullptr);
}

std::complex<double> TabulatedCF::operator()(double t) const {
  if (t < 0.0) return std::conj((*this)(-t));
  if (t == 0.0) return 1.0;
  if (t >= t_max_) return exact(t);
  const double pos = t / step_;
  const auto k = std::min(static_cast<std::size_t>(pos), values_.size() - 2);
  if (t < exact_below_) return exact(t);
  const double s = pos - static_cast<double>(k);
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * values_[k] + h10 * step_ * slopes_[k] + h01 * values_[k + 1] + h11 * step_ * slopes_[k + 1];
}

std::complex<double> disintegration_reference(const SolutionSpec& spec, double alpha, double wstar_prev, double w,
                                              double t) {
  const auto limit = solution_cf_term(spec, alpha, 0.0, w, t);
  if (!spec.inhomogeneous) return limit;
  return std::exp(1i * (wstar_prev * t)) * limit;
}

CFTrace disintegration_track(const SolutionSpec& spec, double alpha, const CharacteristicFunction& phi,
                             std::uint32_t depth_max, std::span<const double> t_grid, std::uint64_t seed,
                             std::size_t trees, unsigned workers) {
  check_grid(t_grid);
  if (trees == 0) throw InvalidArgument("disintegration needs at least one tree");
  if (!phi) throw InvalidArgument("disintegration needs a characteristic function");
  const std::uint64_t base = tagged_seed(seed, kTagDisintegration);
  std::vector<TreeTrace> traces(trees);
  parallel_for(trees, workers, [&](std::size_t i) {
    traces[i] = trace_tree(spec, alpha, phi, depth_max, t_grid, batch_tree_seed(base, i));
  });

  CFTrace out;
  out.t_grid.assign(t_grid.begin(), t_grid.end());
  out.depth_max = depth_max;
  out.trees = trees;
  const std::size_t k_count = t_grid.size();
  out.values = traces.front().phi;
  out.reference.assign(depth_max + 1, std::vector<std::complex<double>>(k_count));
  out.deviation.assign(depth_max + 1, 0.0);
  out.mean_deviation.assign(depth_max + 1, 0.0);
  out.max_deviation.assign(depth_max + 1, 0.0);
  out.batch_mean.assign(depth_max + 1, std::vector<std::complex<double>>(k_count, 0.0));
  for (std::size_t i = 0; i < trees; ++i) {
    const auto& tr = traces[i];
    for (std::uint32_t n = 0; n <= depth_max; ++n) {
      double sup = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        const auto ref = disintegration_reference(spec, alpha, tr.wstar_prev[n], tr.w[n], t_grid[k]);
        if (i == 0) out.reference[n][k] = ref;
        sup = std::max(sup, std::abs(tr.phi[n][k] - ref));
        out.batch_mean[n][k] += tr.phi[n][k];
      }
      if (i == 0) out.deviation[n] = sup;
      out.mean_deviation[n] += sup;
      out.max_deviation[n] = std::max(out.max_deviation[n], sup);
    }
  }
  const double scale = 1.0 / static_cast<double>(trees);
  for (std::uint32_t n = 0; n <= depth_max; ++n) {
    out.mean_deviation[n] *= scale;
    for (auto& z : out.batch_mean[n]) z *= scale;
  }
  out.phi.reserve(k_count);
  for (double t : t_grid) out.phi.push_back(phi(t));
  return out;
}

MeanIdentityReport mean_identity_check(const SolutionSpec& spec, double alpha, const CoupledBatch& coupled,
                                       std::uint32_t depth, std::span<const double> t_grid, std::size_t batch,
                                       std::uint64_t seed, unsigned workers) {
  check_grid(t_grid);
  if (batch < 2) throw InvalidArgument("mean identity check needs a batch of at least 2 trees");
  spec.validate(alpha);
  const double t_max = std::max(max_abs(t_grid), 1e-12);
  const TabulatedCF phi(spec, alpha, coupled, t_max);
  const CharacteristicFunction cf = [&phi](double t) { return phi(t); };

  const std::uint64_t base = tagged_seed(seed, kTagDisintegration);
  const std::size_t k_count = t_grid.size();
  std::vector<std::vector<std::complex<double>>> values(batch);
  parallel_for(batch, workers, [&](std::size_t i) {
    values[i] = trace_tree(spec, alpha, cf, depth, t_grid, batch_tree_seed(base, i)).phi[depth];
  });

  MeanIdentityReport report;
  report.depth = depth;
  report.batch = batch;
  for (std::size_t k = 0; k < k_count; ++k) {
    MeanAccumulator re, im;
    for (const auto& v : values) {
      re.add(v[k].real());
      im.add(v[k].imag());
    }
    const auto ref = solution_cf(spec, alpha, coupled, t_grid[k]);
    MeanIdentityPoint p{};
    p.t = t_grid[k];
    p.mean_phi = {re.mean(), im.mean()};
    p.se_re = re.se();
    p.se_im = im.se();
    p.cf = ref.value;
    p.cf_se_re = ref.se_re;
    p.cf_se_im = ref.se_im;
    const double band_re = report.n_se * std::hypot(p.se_re, p.cf_se_re);
    const double band_im = report.n_se * std::hypot(p.se_im, p.cf_se_im);
    const double tol = 1e-12;
    p.within = std::abs(p.mean_phi.real() - p.cf.real()) <= band_re + tol &&
               std::abs(p.mean_phi.imag() - p.cf.imag()) <= band_im + tol;
    report.all_within = report.all_within && p.within;
    report.points.push_back(p);
  }
  return report;
}

std::complex<double> generation_product(const WeightedTree& tree, std::uint32_t n, const CharacteristicFunction& phi,
                                        double t) {
  std::complex<double> prod = 1.0;
  for (std::size_t i : generation(tree, n).nodes) prod *= phi(tree.node(i).L * t);
  return prod;
}

}  // namespace smoothfix
