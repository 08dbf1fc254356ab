// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "smoothfix/error.hpp"
#include "smoothfix/models.hpp"
#include "smoothfix/rng.hpp"
#include "smoothfix/stats.hpp"

using namespace smoothfix;

namespace {

// Analytic m(θ) for each family, written out independently of the library.
double oracle_m(const BasicSequenceModel& model, double theta) {
  switch (model.family()) {
    case ModelFamily::quicksort:
    case ModelFamily::uniform_split_pair:
    case ModelFamily::iid_uniform_pair:
      return 2.0 / (1.0 + theta);
    case ModelFamily::powered_uniform_pair:
      return 2.0 / (model.param("p") * theta + 1.0);
    case ModelFamily::gaussian_steps_pair:
      return 2.0 * std::exp(-model.param("m0") * theta + theta * theta / 2.0);
    case ModelFamily::deterministic_half_pair:
      return std::pow(2.0, 1.0 - theta);
  }
  return NAN;
}

// Root of the oracle m(θ) = 1 for the test grid.
double oracle_alpha(const BasicSequenceModel& model) {
  switch (model.family()) {
    case ModelFamily::powered_uniform_pair: return 1.0 / model.param("p");
    case ModelFamily::gaussian_steps_pair: {
      const double m0 = model.param("m0");
      return m0 - std::sqrt(m0 * m0 - 2.0 * std::numbers::ln2);
    }
    default: return 1.0;
  }
}

}  // namespace

TEST_CASE("closed-form m matches the analytic formulas") {
  const BasicSequenceModel models[] = {
      builtin_model("quicksort"),
      builtin_model("uniform-split-pair"),
      builtin_model("iid-uniform-pair"),
      builtin_model("powered-uniform-pair", {{"p", 2.0}}),
      builtin_model("gaussian-steps-pair", {{"m0", 1.5}}),
      builtin_model("deterministic-half-pair"),
  };
  for (const auto& model : models) {
    for (double theta : {0.0, 0.3, 1.0, 2.5}) CHECK(model.closed_form_m(theta) == doctest::Approx(oracle_m(model, theta)).epsilon(1e-14));
  }
  CHECK(builtin_model("quicksort").closed_form_m(1.0) == 1.0);
  CHECK(builtin_model("powered-uniform-pair", {{"p", 2.0}}).closed_form_m(0.5) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("closed-form derivatives agree with finite differences") {
  const BasicSequenceModel models[] = {builtin_model("quicksort"), builtin_model("powered-uniform-pair", {{"p", 0.5}}),
                                       builtin_model("gaussian-steps-pair", {{"m0", 1.0}}),
                                       builtin_model("deterministic-half-pair")};
  const double h = 1e-5;
  for (const auto& model : models) {
    for (double theta : {0.2, 1.0, 1.7}) {
      const auto v = *model.closed_form_spectral(theta);
      const double fd1 = (oracle_m(model, theta + h) - oracle_m(model, theta - h)) / (2 * h);
      const double fd2 =
          (oracle_m(model, theta + h) - 2 * oracle_m(model, theta) + oracle_m(model, theta - h)) / (h * h);
      CHECK(v.dm == doctest::Approx(fd1).epsilon(1e-7));
      CHECK(v.d2m == doctest::Approx(fd2).epsilon(1e-4));
    }
  }
}

TEST_CASE("Monte Carlo m over 10^6 draws lies within 4 SE of the closed form") {
  const BasicSequenceModel models[] = {
      builtin_model("quicksort"),
      builtin_model("uniform-split-pair"),
      builtin_model("iid-uniform-pair"),
      builtin_model("powered-uniform-pair", {{"p", 2.0}}),
      builtin_model("gaussian-steps-pair", {{"m0", std::numbers::ln2 + 0.5}}),
      builtin_model("deterministic-half-pair"),
  };
  std::uint64_t seed = 11;
  for (const auto& model : models) {
    const double alpha = oracle_alpha(model);
    for (double theta : {0.0, alpha / 2, alpha}) {
      CounterRng rng(seed++);
      Realization r;
      MeanAccumulator acc;
      for (int i = 0; i < 1'000'000; ++i) {
        model.draw_into(rng, r);
        double s = 0.0;
        for (double t : r.t) s += std::pow(t, theta);
        acc.add(s);
      }
      const double expect = oracle_m(model, theta);
      INFO(model.name() << " theta=" << theta);
      if (acc.se() == 0.0)
        CHECK(acc.mean() == doctest::Approx(expect).epsilon(1e-12));
      else
        CHECK(std::abs(acc.mean() - expect) <= 4 * acc.se());
    }
  }
}

TEST_CASE("quicksort toll") {
  CHECK(quicksort_toll(0.5) == doctest::Approx(1.0 - 2.0 * std::numbers::ln2).epsilon(1e-15));
  CHECK(quicksort_toll(0.5) == doctest::Approx(-0.3863).epsilon(1e-4));
  boost::math::quadrature::tanh_sinh<double> q;
  auto g = [](double u) { return 2 * u * std::log(u) + 2 * (1 - u) * std::log(1 - u) + 1; };
  CHECK(std::abs(q.integrate(g, 0.0, 1.0)) < 1e-12);
  const double eg2 = q.integrate([&](double u) { return g(u) * g(u); }, 0.0, 1.0);
  CHECK(3 * eg2 == doctest::Approx(7.0 - 2.0 * std::numbers::pi * std::numbers::pi / 3.0).epsilon(1e-10));

  const auto model = builtin_model("quicksort");
  CounterRng rng(5);
  Realization r;
  MeanAccumulator c;
  for (int i = 0; i < 1'000'000; ++i) {
    model.draw_into(rng, r);
    c.add(r.c);
  }
  CHECK(std::abs(c.mean()) <= 4 * c.se());
}

TEST_CASE("draws are deterministic and conservative models conserve weight") {
  for (const char* name : {"quicksort", "uniform-split-pair", "deterministic-half-pair"}) {
    const auto model = builtin_model(name);
    CHECK(model.is_conservative());
    for (std::uint64_t s = 0; s < 100000; ++s) {
      const auto r = model.draw(s);
      REQUIRE(std::abs(r.weight_sum() - 1.0) <= 1e-12);
    }
  }
  const auto model = builtin_model("gaussian-steps-pair", {{"m0", 0.3}});
  const auto a = model.draw(99), b = model.draw(99);
  CHECK(a.c == b.c);
  CHECK(a.t == b.t);
  CHECK(a.index == b.index);
  CHECK_FALSE(model.is_conservative());
  CHECK(builtin_model("uniform-split-pair").draw(3).c == 0.0);
}

TEST_CASE("metadata") {
  CHECK(builtin_model("deterministic-half-pair").is_lattice() == Tri::yes);
  CHECK(builtin_model("quicksort").is_lattice() == Tri::no);
  CHECK(builtin_model("quicksort").supports_c());
  CHECK_FALSE(builtin_model("iid-uniform-pair").supports_c());
  CHECK(builtin_model("iid-uniform-pair", {{"c_shift", 0.1}}).supports_c());
  CHECK(builtin_model("quicksort").max_children() == 2);
}

TEST_CASE("extinction drops every weight with the given probability") {
  const auto model = builtin_model("iid-uniform-pair", {{"extinction", 0.3}});
  int empty = 0;
  const int n = 100000;
  for (int s = 0; s < n; ++s) empty += model.draw(s).t.empty();
  CHECK(std::abs(empty / double(n) - 0.3) < 4 * std::sqrt(0.3 * 0.7 / n));
  CHECK(model.closed_form_m(1.0) == doctest::Approx(0.7));
}

TEST_CASE("model specs parse, round-trip and reject bad input") {
  const auto m = parse_model_spec("powered-uniform-pair:p=2");
  CHECK(m.name() == "powered-uniform-pair");
  CHECK(m.param("p") == 2.0);
  CHECK(parse_model_spec(m.spec_string()).spec_string() == m.spec_string());
  CHECK(parse_model_spec("quicksort").spec_string() == "quicksort");
  CHECK_THROWS_AS(parse_model_spec("no-such-model"), InvalidArgument);
  CHECK_THROWS_AS(parse_model_spec("powered-uniform-pair:p=0"), InvalidArgument);
  CHECK_THROWS_AS(parse_model_spec("powered-uniform-pair:p=-1"), InvalidArgument);
  CHECK_THROWS_AS(parse_model_spec("quicksort:p=2"), InvalidArgument);
  CHECK_THROWS_AS(parse_model_spec("quicksort:extinction=1"), InvalidArgument);
  CHECK_THROWS_AS(parse_model_spec("quicksort:c_shift"), InvalidArgument);
  CHECK_THROWS_AS(parse_model_spec("quicksort:c_shift=abc"), InvalidArgument);
  CHECK(builtin_model_names().size() == 6);
}
