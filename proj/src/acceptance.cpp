// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include "smoothfix/acceptance.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "smoothfix/error.hpp"
#include "smoothfix/fixpoints.hpp"
#include "smoothfix/models.hpp"
#include "smoothfix/quicksort.hpp"
#include "smoothfix/rng.hpp"
#include "smoothfix/spectral.hpp"
#include "smoothfix/stable.hpp"
#include "smoothfix/stats.hpp"
#include "smoothfix/verify.hpp"
#include "smoothfix/wbp.hpp"

namespace smoothfix {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t criterion_seed(const AcceptanceOptions& o, int id, std::uint64_t k = 0) {
  return split_seed(tagged_seed(o.seed, static_cast<std::uint64_t>(id)), k);
}

// Quicksort W* settings shared by the criteria that sample it.
constexpr std::uint32_t kWstarDepth = 20;
constexpr double kWstarFloor = 1e-3;

SamplerOptions wstar_options(std::size_t batch, std::uint64_t seed, unsigned workers) {
  SamplerOptions s;
  s.depth = kWstarDepth;
  s.batch = batch;
  s.seed = seed;
  s.workers = workers;
  s.growth.weight_floor = kWstarFloor;
  return s;
}

CriterionResult spectral_exactness(const AcceptanceOptions&) {
  CriterionResult r{1, "spectral exactness", true, "", 0.0};
  std::ostringstream d;
  struct Case {
    BasicSequenceModel model;
    double target;
  };
  const Case cases[] = {{builtin_model("quicksort"), 1.0},
                        {builtin_model("powered-uniform-pair", {{"p", 2.0}}), 0.5},
                        {builtin_model("powered-uniform-pair", {{"p", 0.5}}), 2.0}};
  for (const auto& c : cases) {
    const auto start = Clock::now();
    const auto profile = find_alpha(c.model);
    const double secs = seconds_since(start);
    const double residual = std::abs(c.model.closed_form_m(profile.alpha) - 1.0);
    const bool ok = residual <= 1e-10 && std::abs(profile.alpha - c.target) <= 1e-9 && secs < 1.0;
    r.pass = r.pass && ok;
    d << c.model.spec_string() << ": alpha=" << profile.alpha << " |m-1|=" << residual << " t=" << secs << "s; ";
  }
  r.detail = d.str();
  return r;
}

CriterionResult conservation(const AcceptanceOptions& o) {
  CriterionResult r{2, "conservation of L on generations and exit lines", true, "", 0.0};
  const auto model = builtin_model("quicksort");
  double worst_gen = 0.0, worst_line = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const std::uint64_t seed = criterion_seed(o, 2, s);
    const auto tree = grow_tree(model, 12, seed);
    for (std::uint32_t n = 0; n <= 12; ++n) {
      long double sum = 0.0L;
      for (auto i : generation(tree, n).nodes) sum += tree.node(i).L;
      worst_gen = std::max(worst_gen, static_cast<double>(std::abs(sum - 1.0L)));
    }
    for (int u = 0; u <= 6; ++u) {
      const auto line = first_exit_line(model, u, seed);
      long double sum = 0.0L;
      for (auto i : line.line.nodes) sum += line.tree.node(i).L;
      worst_line = std::max(worst_line, static_cast<double>(std::abs(sum - 1.0L)));
    }
  }
  r.pass = worst_gen <= 1e-9 && worst_line <= 1e-9;
  std::ostringstream d;
  d << "max generation error=" << worst_gen << ", max exit-line error=" << worst_line << " (bound 1e-9)";
  r.detail = d.str();
  return r;
}

CriterionResult biggins(const AcceptanceOptions& o) {
  CriterionResult r{3, "Biggins martingale mean", true, "", 0.0};
  const auto start = Clock::now();
  std::ostringstream d;
  const BasicSequenceModel models[] = {builtin_model("iid-uniform-pair"),
                                       builtin_model("powered-uniform-pair", {{"p", 2.0}})};
  int k = 0;
  for (const auto& model : models) {
    const auto analysis = analyze_model(model, criterion_seed(o, 3, 100 + k));
    SamplerOptions s;
    s.depth = 14;
    s.batch = 20000;
    s.seed = criterion_seed(o, 3, k++);
    s.workers = o.workers;
    const auto w = sample_W(model, analysis.profile, analysis.report, s);
    const bool ok = std::abs(w.mean - 1.0) <= 4.0 * w.se;
    r.pass = r.pass && ok;
    d << model.spec_string() << ": alpha=" << analysis.profile.alpha << " mean W=" << w.mean << " se=" << w.se
      << "; ";
  }
  r.seconds = seconds_since(start);
  r.pass = r.pass && r.seconds < 120.0;
  r.detail = d.str();
  return r;
}

CriterionResult wstar_moments(const AcceptanceOptions& o) {
  CriterionResult r{4, "W* mean and variance", true, "", 0.0};
  const auto model = builtin_model("quicksort");
  const auto analysis = analyze_model(model, criterion_seed(o, 4, 100));
  const auto batch = sample_Wstar(model, analysis.report, wstar_options(10000, criterion_seed(o, 4), o.workers));
  const double oracle = 3.0 * toll_square_integral();
  const double closed = 7.0 - 2.0 * std::numbers::pi * std::numbers::pi / 3.0;
  const double var = sample_variance(batch.values);
  const bool mean_ok = std::abs(batch.mean) <= 4.0 * batch.se;
  const bool var_ok = std::abs(var - oracle) <= 0.05 * oracle;
  const bool cross_ok = std::abs(oracle - closed) <= 1e-8;
  r.pass = mean_ok && var_ok && cross_ok;
  std::ostringstream d;
  d << "mean=" << batch.mean << " se=" << batch.se << " var=" << var << " oracle=" << oracle
    << " closed form=" << closed << " omitted L^2<=" << batch.omitted_l2;
  r.detail = d.str();
  return r;
}

CriterionResult fixed_point_tests(const AcceptanceOptions& o) {
  CriterionResult r{5, "fixed-point tests", true, "", 0.0};
  const auto start = Clock::now();
  constexpr std::size_t n = 5000;
  std::ostringstream d;

  // (a) Cauchy(0,1) under the uniform split.
  const auto split = builtin_model("uniform-split-pair");
  TestOptions ecf;
  ecf.statistic = Statistic::ecf;
  ecf.workers = o.workers;
  int pass_a = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto x = sample_stable({1.0, 1.0, 0.0, 0.0}, 2 * n, criterion_seed(o, 5, s));
    pass_a += fixed_point_test(split, x, n, criterion_seed(o, 5, 100 + s), ecf).pass;
  }

  // (b) W* + Cauchy(0.3, 0.7) under quicksort.
  FamilyCheckOptions family;
  family.n = n;
  family.workers = o.workers;
  int pass_b = 0;
  for (std::uint64_t s = 0; s < 10; ++s) pass_b += quicksort_family_check(0.3, 0.7, criterion_seed(o, 5, 200 + s), family).pass;

  // (c) Standard normal impostor under quicksort.
  const auto quicksort = builtin_model("quicksort");
  TestOptions energy;
  energy.workers = o.workers;
  int reject_c = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto x = sample_stable({2.0, std::sqrt(0.5), 0.0, 0.0}, 2 * n, criterion_seed(o, 5, 300 + s));
    reject_c += !fixed_point_test(quicksort, x, n, criterion_seed(o, 5, 400 + s), energy).pass;
  }

  // (d) Null calibration: a sample against its own other half.
  constexpr std::size_t kNullSeeds = 200;
  constexpr std::size_t kNullHalf = 1000;
  std::size_t rejections = 0;
  for (std::uint64_t s = 0; s < kNullSeeds; ++s) {
    const auto x = sample_stable({2.0, std::sqrt(0.5), 0.0, 0.0}, 2 * kNullHalf, criterion_seed(o, 5, 500 + s));
    const std::span<const double> all(x);
    rejections += !two_sample_test(all.first(kNullHalf), all.subspan(kNullHalf), criterion_seed(o, 5, 800 + s),
                                   energy)
                       .pass;
  }
  const auto ci = binomial_interval(kNullSeeds, 0.01, 0.99);

  r.seconds = seconds_since(start);
  r.pass = pass_a >= 9 && pass_b >= 9 && reject_c == 10 && rejections >= ci.lo && rejections <= ci.hi &&
           r.seconds < 600.0;
  d << "(a) " << pass_a << "/10 pass; (b) " << pass_b << "/10 pass; (c) " << reject_c << "/10 rejected; (d) "
    << rejections << "/" << kNullSeeds << " rejections, 99% interval [" << ci.lo << ", " << ci.hi << "]";
  r.detail = d.str();
  return r;
}

CriterionResult disintegration_exactness(const AcceptanceOptions& o) {
  CriterionResult r{6, "disintegration exactness", true, "", 0.0};
  SolutionSpec spec;
  spec.sigma = 1.0;
  const CharacteristicFunction cauchy = [](double t) { return std::complex<double>(std::exp(-std::abs(t)), 0.0); };
  const std::vector<double> grid{-4.0, -2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
  const auto trace = disintegration_track(spec, 1.0, cauchy, 10, grid, criterion_seed(o, 6), 20, o.workers);
  double worst = 0.0;
  for (double v : trace.max_deviation) worst = std::max(worst, v);
  r.pass = worst <= 1e-12;
  std::ostringstream d;
  d << "sup |Phi_n(t) - exp(-|t|)| over 20 trees, n <= 10: " << worst << " (bound 1e-12)";
  r.detail = d.str();
  return r;
}

CriterionResult mean_identity(const AcceptanceOptions& o) {
  CriterionResult r{7, "disintegration mean identity", true, "", 0.0};
  const auto model = builtin_model("quicksort");
  const auto analysis = analyze_model(model, criterion_seed(o, 7, 100));
  SolutionSpec spec;
  spec.mu = 0.0;
  spec.sigma = 1.0;
  spec.inhomogeneous = true;
  spec.depth = kWstarDepth;
  spec.weight_floor = kWstarFloor;
  const auto pairs = solution_pairs(spec, analysis.profile, analysis.report, 10000, criterion_seed(o, 7, 1), o.workers);
  const std::vector<double> grid{-2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0};
  const auto report = mean_identity_check(spec, 1.0, pairs, 12, grid, 10000, criterion_seed(o, 7, 2), o.workers);
  r.pass = report.all_within;
  std::ostringstream d;
  double worst = 0.0;
  for (const auto& p : report.points) {
    const double zr = std::abs(p.mean_phi.real() - p.cf.real()) / std::max(std::hypot(p.se_re, p.cf_se_re), 1e-300);
    const double zi = std::abs(p.mean_phi.imag() - p.cf.imag()) / std::max(std::hypot(p.se_im, p.cf_se_im), 1e-300);
    if (p.t != 0.0) worst = std::max({worst, zr, zi});
  }
  d << "largest |difference| / SE over grid = " << worst << " (bound 4)";
  r.detail = d.str();
  return r;
}

CriterionResult embedded_records_mean(const AcceptanceOptions& o) {
  CriterionResult r{8, "embedded record line mean", true, "", 0.0};
  const auto model = builtin_model("gaussian-steps-pair", {{"m0", std::numbers::ln2 + 0.5}});
  MeanAccumulator acc;
  const std::uint64_t base = tagged_seed(o.seed, 8);
  for (std::uint64_t s = 0; s < 100000; ++s) {
    const auto line = embedded_records(model, split_seed(base, s));
    double sum = 0.0;
    for (auto i : line.line.nodes) sum += std::exp(-line.tree.node(i).S);
    acc.add(sum);
  }
  r.pass = std::abs(acc.mean() - 1.0) <= 4.0 * acc.se();
  std::ostringstream d;
  d << "mean=" << acc.mean() << " se=" << acc.se();
  r.detail = d.str();
  return r;
}

CriterionResult stable_sampler(const AcceptanceOptions& o) {
  CriterionResult r{9, "stable sampler characteristic function", true, "", 0.0};
  constexpr std::size_t n = 100000;
  const StableParams cases[] = {{0.5, 1.0, 0.5, 0.0}, {1.0, 1.0, 0.0, 0.0}, {1.5, 2.0, -1.0, 0.0}, {2.0, 1.0, 0.0, 0.0}};
  const std::vector<double> grid{-4.0, -2.0, -1.0, -0.5, -0.25, -0.1, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0};
  const double bound = 5.0 / std::sqrt(static_cast<double>(n)) + 0.01;
  std::ostringstream d;
  std::uint64_t k = 0;
  for (const auto& p : cases) {
    const auto x = sample_stable(p, n, criterion_seed(o, 9, k++));
    double worst = 0.0;
    for (double t : grid) worst = std::max(worst, std::abs(ecf(x, t) - std::exp(stable_psi(p, t))));
    r.pass = r.pass && worst <= bound;
    d << "(" << p.alpha << "," << p.sigma << "," << p.beta << "): " << worst << "; ";
  }
  d << "bound " << bound;
  r.detail = d.str();
  return r;
}

CriterionResult quicksort_end_to_end(const AcceptanceOptions& o) {
  CriterionResult r{10, "Quicksort end to end", true, "", 0.0};
  double worst_rel = 0.0;
  for (std::size_t n = 0; n <= 10000; ++n) {
    const double a = exact_mean(n), b = exact_mean_closed_form(n);
    worst_rel = std::max(worst_rel, std::abs(a - b) / std::max(1.0, std::abs(b)));
  }
  const auto model = builtin_model("quicksort");
  const auto analysis = analyze_model(model, criterion_seed(o, 10, 100));
  TestOptions energy;
  energy.workers = o.workers;
  int passes = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto cn = simulate_cn(10000, 5000, criterion_seed(o, 10, s), o.workers);
    const auto ws = sample_Wstar(model, analysis.report, wstar_options(5000, criterion_seed(o, 10, 200 + s), o.workers));
    passes += two_sample_test(cn.values, ws.values, criterion_seed(o, 10, 400 + s), energy).pass;
  }
  r.pass = worst_rel <= 1e-8 && passes >= 9;
  std::ostringstream d;
  d << passes << "/10 two-sample tests pass; max relative exact-mean error=" << worst_rel << " (bound 1e-8)";
  r.detail = d.str();
  return r;
}

}  // namespace

double toll_integral() {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate([](double u) { return quicksort_toll(u); }, 0.0, 1.0);
}

double toll_square_integral() {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(
      [](double u) {
        const double g = quicksort_toll(u);
        return g * g;
      },
      0.0, 1.0);
}

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  const auto start = Clock::now();
  CriterionResult r;
  switch (id) {
    case 1: r = spectral_exactness(options); break;
    case 2: r = conservation(options); break;
    case 3: r = biggins(options); break;
    case 4: r = wstar_moments(options); break;
    case 5: r = fixed_point_tests(options); break;
    case 6: r = disintegration_exactness(options); break;
    case 7: r = mean_identity(options); break;
    case 8: r = embedded_records_mean(options); break;
    case 9: r = stable_sampler(options); break;
    case 10: r = quicksort_end_to_end(options); break;
    default: throw InvalidArgument("unknown acceptance criterion " + std::to_string(id));
  }
  r.seconds = seconds_since(start);
  return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& log) {
  std::vector<int> ids = options.only;
  if (ids.empty())
    for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
  std::vector<CriterionResult> results;
  for (int id : ids) {
    results.push_back(run_criterion(id, options));
    log << format_result(results.back()) << std::endl;
  }
  return results;
}

std::string format_result(const CriterionResult& result) {
  std::ostringstream out;
  out << "criterion " << result.id << " " << (result.pass ? "PASS" : "FAIL") << " [" << result.name << "] "
      << result.detail << " (" << result.seconds << " s)";
  return out.str();
}

}  // namespace smoothfix
