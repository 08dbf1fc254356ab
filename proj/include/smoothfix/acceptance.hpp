// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

// The end-to-end acceptance suite, shared by the test binary and
// `smoothfix suite`.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace smoothfix {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  unsigned workers = 1;
  std::uint64_t seed = 20260101;
  /// Criteria to run (1..10); empty runs all.
  std::vector<int> only;
};

inline constexpr int kCriterionCount = 10;

CriterionResult run_criterion(int id, const AcceptanceOptions& options);

/// Runs the selected criteria, printing one line per criterion to `log` as
/// each finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& log);

std::string format_result(const CriterionResult& result);

/// Numeric-integration oracles for the Quicksort toll: ∫₀¹ g and ∫₀¹ g².
double toll_integral();
double toll_square_integral();

}  // namespace smoothfix
