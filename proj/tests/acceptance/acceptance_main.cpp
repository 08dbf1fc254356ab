// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

// Runs the acceptance criteria and prints one PASS/FAIL line for each.
// Optional arguments restrict the run to the given criterion numbers.

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "smoothfix/acceptance.hpp"

int main(int argc, char** argv) {
  smoothfix::AcceptanceOptions options;
  options.workers = std::max(1u, std::thread::hardware_concurrency());
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > smoothfix::kCriterionCount) {
      std::cerr << "usage: acceptance [criterion ...] with criteria 1.." << smoothfix::kCriterionCount << '\n';
      return 2;
    }
    options.only.push_back(id);
  }
  const auto results = smoothfix::run_acceptance(options, std::cout);
  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.pass; });
  std::cout << (results.size() - static_cast<std::size_t>(failed)) << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
