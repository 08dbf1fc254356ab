// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "smoothfix/models.hpp"
#include "smoothfix/spectral.hpp"
#include "smoothfix/stats.hpp"

using namespace smoothfix;

TEST_CASE("eval_m on closed-form models") {
  const auto quick = builtin_model("quicksort");
  CHECK(eval_m(quick, 1.0, 0, 0).value == 1.0);
  CHECK(eval_m(quick, 0.0, 0, 0).value == 2.0);
  CHECK(eval_m(quick, 1.0, 0, 0).se == 0.0);
  CHECK(eval_m(builtin_model("powered-uniform-pair", {{"p", 0.5}}), 2.0, 0, 0).value == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("find_alpha locates the first root") {
  struct Case {
    const char* name;
    ParamMap params;
    double alpha;
  };
  const double m0 = std::numbers::ln2 + 0.5;
  const Case cases[] = {
      {"quicksort", {}, 1.0},
      {"powered-uniform-pair", {{"p", 2.0}}, 0.5},
      {"powered-uniform-pair", {{"p", 0.5}}, 2.0},
      {"gaussian-steps-pair", {{"m0", m0}}, m0 - std::sqrt(m0 * m0 - 2 * std::numbers::ln2)},
      {"deterministic-half-pair", {}, 1.0},
  };
  for (const auto& c : cases) {
    INFO(c.name);
    const auto model = builtin_model(c.name, c.params);
    const auto p = find_alpha(model);
    CHECK(p.closed_form);
    CHECK(std::abs(p.alpha - c.alpha) <= 1e-9);
    CHECK(std::abs(model.closed_form_m(p.alpha) - 1.0) <= 1e-10);
    CHECK(p.residual <= p.residual_bound);
    CHECK(p.m_prime_negative);
    CHECK(p.min_m_below_alpha > 1.0);
  }
}

TEST_CASE("m is convex along a grid") {
  const BasicSequenceModel models[] = {builtin_model("quicksort"), builtin_model("gaussian-steps-pair", {{"m0", 1.2}}),
                                       builtin_model("powered-uniform-pair", {{"p", 3.0}})};
  for (const auto& model : models) {
    for (double th = 0.1; th < 5.0; th += 0.1) {
      const double a = model.closed_form_m(th - 0.05), b = model.closed_form_m(th), c = model.closed_form_m(th + 0.05);
      CHECK(a + c - 2 * b >= -1e-14);
    }
  }
}

TEST_CASE("Monte Carlo m is unbiased across independent runs") {
  const auto model = builtin_model("quicksort", {{"closed_form", 0.0}});
  MeanAccumulator runs;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto e = eval_m(model, 0.5, 2000, s);
    CHECK(e.se > 0.0);
    runs.add(e.value);
  }
  CHECK(std::abs(runs.mean() - 4.0 / 3.0) <= 4 * runs.se());
}

TEST_CASE("Monte Carlo root finding") {
  SpectralOptions opts;
  opts.seed = 3;
  const auto p = find_alpha(builtin_model("iid-uniform-pair", {{"closed_form", 0.0}}), opts);
  CHECK_FALSE(p.closed_form);
  CHECK(p.mc_samples == opts.mc_budget);
  CHECK(p.residual <= p.residual_bound);
  CHECK(std::abs(p.alpha - 1.0) < 0.02);
}

TEST_CASE("spectral failures are reported by kind") {
  auto kind_of = [](const BasicSequenceModel& model) {
    try {
      find_alpha(model);
    } catch (const SpectralError& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  // m(0) = 2 * 0.4 = 0.8 < 1.
  CHECK(kind_of(builtin_model("iid-uniform-pair", {{"extinction", 0.6}})) == static_cast<int>(SpectralError::Kind::a2_violated));
  // m(θ) = 2 exp(θ²/2) never reaches 1.
  CHECK(kind_of(builtin_model("gaussian-steps-pair", {{"m0", 0.0}})) == static_cast<int>(SpectralError::Kind::no_bracket));
  CHECK_THROWS_AS(find_alpha(builtin_model("gaussian-steps-pair", {{"m0", 0.0}})), PreconditionError);
}

TEST_CASE("assumption report for quicksort") {
  const auto model = builtin_model("quicksort");
  const auto r = check_assumptions(model, find_alpha(model));
  CHECK(r.a1 == Tri::yes);
  CHECK(r.a2);
  CHECK(r.a3);
  CHECK(r.a4a == Tri::yes);
  CHECK(r.a4b == Tri::yes);
  CHECK(r.a5 == Tri::yes);
  CHECK(r.c1 == Tri::yes);
  // C2 needs m(β) < 1 for some β <= 1, and m(β) = 2/(1+β) >= 1 there.
  CHECK(r.c2 == Tri::no);
  // E Σ T log T = m'(1) = -1/2 and E Σ T (log T)^2 = m''(1) = 1/2.
  CHECK(r.log_moment == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(r.a5_moment == doctest::Approx(0.5).epsilon(0.01));
  CHECK(r.llog_moment == doctest::Approx(0.0));
  CHECK_FALSE(r.notes.empty());
}

TEST_CASE("assumption report for lattice and Monte Carlo models") {
  const auto half = builtin_model("deterministic-half-pair");
  CHECK(check_assumptions(half, find_alpha(half)).a1 == Tri::no);

  const auto iid = builtin_model("iid-uniform-pair", {{"closed_form", 0.0}});
  SpectralOptions so;
  so.seed = 9;
  AssumptionOptions ao;
  ao.seed = 9;
  const auto r = check_assumptions(iid, find_alpha(iid, so), ao);
  CHECK(r.a4a == Tri::yes);
  CHECK(std::abs(r.log_moment + 0.5) < 0.05);
  CHECK(r.notes.find("Monte Carlo") != std::string::npos);

  const auto shifted = builtin_model("gaussian-steps-pair", {{"m0", 1.5}, {"c_shift", 1.0}});
  const auto g = check_assumptions(shifted, find_alpha(shifted));
  CHECK(g.c2 == Tri::yes);
  CHECK(g.c2_beta > 0.0);
  CHECK(g.c2_beta <= 1.0);
  CHECK(shifted.closed_form_m(g.c2_beta) < 1.0);

  const auto a = analyze_model(builtin_model("quicksort"), 1);
  CHECK(a.profile.alpha == doctest::Approx(1.0));
  CHECK(a.report.a4a == Tri::yes);
}
