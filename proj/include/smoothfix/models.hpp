// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

// Basic sequences (C, T_1, ..., T_N) driving the smoothing transform.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smoothfix/rng.hpp"

namespace smoothfix {

/// Three-valued outcome for properties that finite samples cannot settle.
enum class Tri { no, yes, unknown };

std::string_view to_string(Tri value) noexcept;

using ParamMap = std::map<std::string, double, std::less<>>;

/// One draw of the basic sequence. Zero weights are dropped; `index` keeps
/// the original (1-based) position of each surviving weight.
struct Realization {
  double c = 0.0;
  std::vector<double> t;
  std::vector<std::uint32_t> index;

  double weight_sum() const noexcept;
};

enum class ModelFamily {
  quicksort,
  uniform_split_pair,
  iid_uniform_pair,
  powered_uniform_pair,
  gaussian_steps_pair,
  deterministic_half_pair,
};

/// Closed-form m and its first two θ-derivatives,
/// m^(k)(θ) = E Σ T_j^θ (log T_j)^k.
struct SpectralValues {
  double m;
  double dm;
  double d2m;
};

/// Immutable, copyable model. Draws are pure functions of (model, seed).
///
/// Parameters common to all families:
///   extinction  probability in [0,1) that a draw has N = 0
///   c_shift     constant added to C
///   closed_form 0 hides the analytic m (forces the Monte Carlo paths)
/// Family parameters: p > 0 (powered-uniform-pair), m0 (gaussian-steps-pair).
class BasicSequenceModel {
 public:
  BasicSequenceModel(ModelFamily family, ParamMap params);

  const std::string& name() const noexcept { return name_; }
  ModelFamily family() const noexcept { return family_; }
  const ParamMap& params() const noexcept { return params_; }
  double param(std::string_view key) const;

  /// Canonical "name:key=value,..." form, round-trippable through parse_model_spec.
  std::string spec_string() const;

  Realization draw(std::uint64_t seed) const;
  /// Draw from an existing stream into `out`, reusing its storage.
  void draw_into(CounterRng& rng, Realization& out) const;

  bool has_closed_form_m() const noexcept { return closed_form_; }
  /// m(θ); throws std::logic_error when the model has no closed form.
  double closed_form_m(double theta) const;
  std::optional<SpectralValues> closed_form_spectral(double theta) const;

  Tri is_lattice() const noexcept;
  bool is_conservative() const noexcept;
  /// True when C is not identically zero.
  bool supports_c() const noexcept;
  std::size_t max_children() const noexcept { return 2; }

 private:
  ModelFamily family_;
  std::string name_;
  ParamMap params_;
  double extinction_ = 0.0;
  double c_shift_ = 0.0;
  double p_ = 1.0;
  double m0_ = 0.0;
  bool closed_form_ = true;
};

/// Look up a built-in family by name. Throws InvalidArgument on an unknown
/// name, an unknown parameter or an out-of-range value.
BasicSequenceModel builtin_model(std::string_view name, const ParamMap& params = {});

/// Parse "name" or "name:key=value,key=value".
BasicSequenceModel parse_model_spec(std::string_view spec);

std::vector<std::string> builtin_model_names();

/// Quicksort toll g(u) = 2u log u + 2(1-u) log(1-u) + 1.
double quicksort_toll(double u) noexcept;

}  // namespace smoothfix
