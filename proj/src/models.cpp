// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include "smoothfix/models.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "smoothfix/error.hpp"

namespace smoothfix {
namespace {

struct FamilyInfo {
  ModelFamily family;
  std::string_view name;
};

constexpr std::array<FamilyInfo, 6> kFamilies{{
    {ModelFamily::quicksort, "quicksort"},
    {ModelFamily::uniform_split_pair, "uniform-split-pair"},
    {ModelFamily::iid_uniform_pair, "iid-uniform-pair"},
    {ModelFamily::powered_uniform_pair, "powered-uniform-pair"},
    {ModelFamily::gaussian_steps_pair, "gaussian-steps-pair"},
    {ModelFamily::deterministic_half_pair, "deterministic-half-pair"},
}};

std::string_view family_name(ModelFamily family) {
  for (const auto& info : kFamilies)
    if (info.family == family) return info.name;
  throw std::logic_error("unregistered model family");
}

bool accepts_param(ModelFamily family, std::string_view key) {
  if (key == "extinction" || key == "c_shift" || key == "closed_form") return true;
  if (key == "p") return family == ModelFamily::powered_uniform_pair;
  if (key == "m0") return family == ModelFamily::gaussian_steps_pair;
  return false;
}

double lookup(const ParamMap& params, std::string_view key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::string format_double(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

}  // namespace

std::string_view to_string(Tri value) noexcept {
  switch (value) {
    case Tri::no: return "false";
    case Tri::yes: return "true";
    case Tri::unknown: break;
  }
  return "unknown";
}

double Realization::weight_sum() const noexcept {
  double s = 0.0;
  for (double w : t) s += w;
  return s;
}

double quicksort_toll(double u) noexcept {
  return 2.0 * u * std::log(u) + 2.0 * (1.0 - u) * std::log1p(-u) + 1.0;
}

BasicSequenceModel::BasicSequenceModel(ModelFamily family, ParamMap params)
    : family_(family), name_(family_name(family)), params_(std::move(params)) {
  for (const auto& [key, value] : params_) {
    if (!accepts_param(family_, key))
      throw InvalidArgument("model '" + name_ + "' has no parameter '" + key + "'");
    if (!std::isfinite(value))
      throw InvalidArgument("model parameter '" + key + "' must be finite");
  }
  extinction_ = lookup(params_, "extinction", 0.0);
  c_shift_ = lookup(params_, "c_shift", 0.0);
  closed_form_ = lookup(params_, "closed_form", 1.0) != 0.0;
  if (extinction_ < 0.0 || extinction_ >= 1.0)
    throw InvalidArgument("extinction must lie in [0, 1)");
  if (family_ == ModelFamily::powered_uniform_pair) {
    p_ = lookup(params_, "p", 1.0);
    if (p_ <= 0.0) throw InvalidArgument("powered-uniform-pair requires p > 0");
  }
  if (family_ == ModelFamily::gaussian_steps_pair) m0_ = lookup(params_, "m0", 0.0);
}

double BasicSequenceModel::param(std::string_view key) const {
  const auto it = params_.find(key);
  if (it == params_.end()) throw InvalidArgument("model parameter '" + std::string(key) + "' not set");
  return it->second;
}

std::string BasicSequenceModel::spec_string() const {
  std::string out = name_;
  char sep = ':';
  for (const auto& [key, value] : params_) {
    out += sep;
    out += key;
    out += '=';
    out += format_double(value);
    sep = ',';
  }
  return out;
}

Realization BasicSequenceModel::draw(std::uint64_t seed) const {
  CounterRng rng(seed);
  Realization out;
  draw_into(rng, out);
  return out;
}

void BasicSequenceModel::draw_into(CounterRng& rng, Realization& out) const {
  out.t.clear();
  out.index.clear();
  out.c = c_shift_;
  std::array<double, 2> w{};
  switch (family_) {
    case ModelFamily::quicksort: {
      const double u = rng.uniform();
      out.c += quicksort_toll(u);
      w = {u, 1.0 - u};
      break;
    }
    case ModelFamily::uniform_split_pair: {
      const double u = rng.uniform();
      w = {u, 1.0 - u};
      break;
    }
    case ModelFamily::iid_uniform_pair:
      w = {rng.uniform(), rng.uniform()};
      break;
    case ModelFamily::powered_uniform_pair:
      w = {std::pow(rng.uniform(), p_), std::pow(rng.uniform(), p_)};
      break;
    case ModelFamily::gaussian_steps_pair: {
      const double x1 = m0_ + rng.normal();
      const double x2 = m0_ + rng.normal();
      w = {std::exp(-x1), std::exp(-x2)};
      break;
    }
    case ModelFamily::deterministic_half_pair:
      w = {0.5, 0.5};
      break;
  }
  // The extinction coin is drawn last so the remaining draws keep their law.
  if (extinction_ > 0.0 && rng.uniform() < extinction_) return;
  for (std::uint32_t j = 0; j < w.size(); ++j) {
    if (w[j] > 0.0) {
      out.t.push_back(w[j]);
      out.index.push_back(j + 1);
    }
  }
}

std::optional<SpectralValues> BasicSequenceModel::closed_form_spectral(double theta) const {
  if (!closed_form_) return std::nullopt;
  SpectralValues v{};
  switch (family_) {
    case ModelFamily::quicksort:
    case ModelFamily::uniform_split_pair:
    case ModelFamily::iid_uniform_pair:
    case ModelFamily::powered_uniform_pair: {
      // E U^{pθ} = 1/(pθ+1) for each of the two weights.
      const double p = family_ == ModelFamily::powered_uniform_pair ? p_ : 1.0;
      const double a = p * theta + 1.0;
      v = {2.0 / a, -2.0 * p / (a * a), 4.0 * p * p / (a * a * a)};
      break;
    }
    case ModelFamily::gaussian_steps_pair: {
      const double m = 2.0 * std::exp(-m0_ * theta + 0.5 * theta * theta);
      const double k = theta - m0_;
      v = {m, m * k, m * (k * k + 1.0)};
      break;
    }
    case ModelFamily::deterministic_half_pair: {
      const double m = 2.0 * std::exp2(-theta);
      const double l = std::numbers::ln2;
      v = {m, -l * m, l * l * m};
      break;
    }
  }
  const double survive = 1.0 - extinction_;
  return SpectralValues{survive * v.m, survive * v.dm, survive * v.d2m};
}

double BasicSequenceModel::closed_form_m(double theta) const {
  const auto v = closed_form_spectral(theta);
  if (!v) throw std::logic_error("model '" + name_ + "' has no closed-form m");
  return v->m;
}

Tri BasicSequenceModel::is_lattice() const noexcept {
  return family_ == ModelFamily::deterministic_half_pair ? Tri::yes : Tri::no;
}

bool BasicSequenceModel::is_conservative() const noexcept {
  if (extinction_ > 0.0) return false;
  return family_ == ModelFamily::quicksort || family_ == ModelFamily::uniform_split_pair ||
         family_ == ModelFamily::deterministic_half_pair;
}

bool BasicSequenceModel::supports_c() const noexcept {
  return family_ == ModelFamily::quicksort || c_shift_ != 0.0;
}

BasicSequenceModel builtin_model(std::string_view name, const ParamMap& params) {
  for (const auto& info : kFamilies)
    if (info.name == name) return BasicSequenceModel(info.family, params);
  throw InvalidArgument("unknown model '" + std::string(name) + "'");
}

BasicSequenceModel parse_model_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  ParamMap params;
  if (colon != std::string_view::npos) {
    std::string_view rest = spec.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0)
        throw InvalidArgument("malformed model parameter '" + std::string(item) + "'");
      const std::string_view key = item.substr(0, eq);
      const std::string_view text = item.substr(eq + 1);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidArgument("model parameter '" + std::string(key) + "' is not a number");
      params.emplace(std::string(key), value);
    }
  }
  return builtin_model(name, params);
}

std::vector<std::string> builtin_model_names() {
  std::vector<std::string> names;
  for (const auto& info : kFamilies) names.emplace_back(info.name);
  return names;
}

}  // namespace smoothfix
