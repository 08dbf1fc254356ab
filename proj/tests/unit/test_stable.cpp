// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "smoothfix/error.hpp"
#include "smoothfix/stable.hpp"
#include "smoothfix/stats.hpp"
#include "smoothfix/verify.hpp"

using namespace smoothfix;

TEST_CASE("characteristic exponent") {
  StableParams cauchy{1.0, 2.0, 0.0, 0.5};
  CHECK(std::abs(stable_psi(cauchy, 3.0) - std::complex<double>(-6.0, 1.5)) < 1e-14);
  StableParams normal{2.0, 1.5, 0.0, 0.0};
  CHECK(std::abs(stable_psi(normal, 2.0) - std::complex<double>(-9.0, 0.0)) < 1e-14);
  StableParams skew{1.5, 1.0, 1.0, 0.0};
  const double tan_term = std::tan(std::numbers::pi * 0.75);
  const auto expect = -std::pow(2.0, 1.5) * std::complex<double>(1.0, -tan_term);
  CHECK(std::abs(stable_psi(skew, 2.0) - expect) < 1e-12);
  CHECK(std::abs(stable_psi(skew, -2.0) - std::conj(expect)) < 1e-12);
  CHECK(stable_psi(skew, 0.0) == std::complex<double>(0.0, 0.0));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((StableParams{0.0, 1.0, 0.0, 0.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS((StableParams{2.5, 1.0, 0.0, 0.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS((StableParams{1.5, -1.0, 0.0, 0.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS((StableParams{1.5, 1.0, 1.5, 0.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS((StableParams{2.0, 1.0, 0.5, 0.0}).validate(), InvalidArgument);
  CounterRng rng(1);
  CHECK_THROWS_AS(draw_stable(StableParams{1.0, 1.0, 0.5, 0.0}, rng), InvalidArgument);
}

TEST_CASE("alpha = 2 draws are normal with variance 2 sigma^2") {
  const auto xs = sample_stable({2.0, 0.7, 0.0, 0.0}, 200000, 3);
  MeanAccumulator acc, sq;
  for (double x : xs) {
    acc.add(x);
    sq.add(x * x);
  }
  CHECK(std::abs(acc.mean()) <= 4 * acc.se());
  CHECK(std::abs(sq.mean() - 2 * 0.49) <= 4 * sq.se());
}

TEST_CASE("alpha = 1 draws are Cauchy: median at mu and quartiles at mu -+ sigma") {
  const auto xs = sample_stable({1.0, 1.5, 0.0, -0.4}, 100000, 4);
  auto sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  CHECK(median(xs) == doctest::Approx(-0.4).epsilon(0.02).scale(1.0));
  CHECK(sorted[static_cast<std::size_t>(0.25 * n)] == doctest::Approx(-1.9).epsilon(0.03));
  CHECK(sorted[static_cast<std::size_t>(0.75 * n)] == doctest::Approx(1.1).epsilon(0.03));
}

TEST_CASE("empirical characteristic functions match exp(psi)") {
  const StableParams cases[] = {{0.7, 1.0, 0.5, 0.2}, {1.5, 0.8, -0.6, 0.0}, {1.0, 1.0, 0.0, 1.0}, {2.0, 1.0, 0.0, 0.0},
                                {1.2, 0.5, 1.0, -1.0}};
  const std::size_t n = 100000;
  const double bound = 5.0 / std::sqrt(static_cast<double>(n)) + 0.01;
  std::uint64_t seed = 100;
  for (const auto& p : cases) {
    const auto xs = sample_stable(p, n, seed++);
    double sup = 0.0;
    for (double t : {-4.0, -2.0, -1.0, -0.5, -0.25, -0.1, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0})
      sup = std::max(sup, std::abs(ecf(xs, t) - std::exp(stable_psi(p, t))));
    INFO("alpha=" << p.alpha << " beta=" << p.beta);
    CHECK(sup <= bound);
  }
}

TEST_CASE("strict stability: X1 + X2 is distributed as 2^(1/alpha) X") {
  const StableParams p{1.5, 1.0, 0.3, 0.0};
  const auto a = sample_stable(p, 4000, 1), b = sample_stable(p, 4000, 2), c = sample_stable(p, 4000, 3);
  std::vector<double> sum(4000), scaled(4000);
  for (std::size_t i = 0; i < 4000; ++i) {
    sum[i] = a[i] + b[i];
    scaled[i] = std::pow(2.0, 1.0 / 1.5) * c[i];
  }
  CHECK(two_sample_test(sum, scaled, 9).pass);
  for (auto& x : scaled) x *= 1.5;
  CHECK_FALSE(two_sample_test(sum, scaled, 9).pass);
}

TEST_CASE("regimes") {
  CHECK(regime_for_alpha(1.0) == Regime::alpha_eq_1);
  CHECK(regime_for_alpha(2.0 - 1e-10) == Regime::alpha_eq_2);
  CHECK(regime_for_alpha(0.5) == Regime::alpha_ne_1_2);
  CHECK(parse_regime(to_string(Regime::alpha_eq_2)) == Regime::alpha_eq_2);
  CHECK_THROWS_AS(parse_regime("alpha_eq_3"), InvalidArgument);
}

TEST_CASE("solution spec validation") {
  SolutionSpec s;
  s.regime = Regime::alpha_eq_1;
  CHECK_NOTHROW(s.validate(1.0));
  CHECK_THROWS_AS(s.validate(0.5), InvalidArgument);
  s.sigma = -1.0;
  CHECK_THROWS_AS(s.validate(1.0), InvalidArgument);
  s.sigma = 1.0;
  s.beta = 0.5;
  CHECK_THROWS_AS(s.validate(1.0), InvalidArgument);
  SolutionSpec t;
  t.regime = Regime::alpha_eq_2;
  t.mu = 1.0;
  CHECK_THROWS_AS(t.validate(2.0), InvalidArgument);
}

TEST_CASE("solution characteristic function") {
  SolutionSpec s;
  s.inhomogeneous = true;
  s.sigma = 0.8;
  s.mu = 0.3;
  CoupledBatch pairs;
  pairs.wstar = {0.1, -0.4, 0.7};
  pairs.w = {1.0, 1.0, 1.0};
  CHECK(std::abs(solution_cf(s, 1.0, pairs, 0.0).value - 1.0) < 1e-15);
  for (double t : {0.3, 1.0, 5.0}) {
    const auto plus = solution_cf(s, 1.0, pairs, t).value, minus = solution_cf(s, 1.0, pairs, -t).value;
    CHECK(std::abs(plus - std::conj(minus)) < 1e-14);
    CHECK(std::abs(plus) <= 1.0 + 1e-14);
  }
  // Single pair: exp(i w* t + i μ w t - σ w |t|).
  const auto term = solution_cf_term(s, 1.0, 0.7, 2.0, 1.5);
  CHECK(std::abs(term - std::exp(std::complex<double>(-0.8 * 2.0 * 1.5, 0.7 * 1.5 + 0.3 * 2.0 * 1.5))) < 1e-14);
  s.inhomogeneous = false;
  CHECK(std::abs(solution_cf_term(s, 1.0, 0.7, 2.0, 1.5) -
                 std::exp(std::complex<double>(-0.8 * 2.0 * 1.5, 0.3 * 2.0 * 1.5))) < 1e-14);
}

TEST_CASE("solution samples") {
  // Homogeneous uniform-split with W = 1: X is Cauchy(0, σ).
  SolutionSpec s;
  s.model = builtin_model("uniform-split-pair");
  s.sigma = 1.0;
  s.depth = 10;
  const auto a = analyze_model(s.model, 1);
  const auto x = solution_sample(s, a.profile, a.report, 4000, 5);
  REQUIRE(x.values.size() == 4000);
  const auto y = sample_stable({1.0, 1.0, 0.0, 0.0}, 4000, 6);
  TestOptions ecf;
  ecf.statistic = Statistic::ecf;
  CHECK(two_sample_test(x.values, y, 7, ecf).pass);

  // σ = 0 inhomogeneous quicksort: X = W*.
  SolutionSpec q;
  q.sigma = 0.0;
  q.inhomogeneous = true;
  q.depth = 10;
  const auto b = analyze_model(q.model, 1);
  const auto pairs = solution_pairs(q, b.profile, b.report, 50, 8);
  const auto xs = solution_from_pairs(q, 1.0, pairs, 9);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(xs[i] == doctest::Approx(pairs.wstar[i]).epsilon(1e-12));
  const auto again = solution_sample(q, b.profile, b.report, 50, 8);
  const auto twice = solution_sample(q, b.profile, b.report, 50, 8);
  CHECK(again.values == twice.values);
}
