// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace smoothfix::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitRejected = 1,
  kExitUsage = 2,
  kExitResource = 3,
};

/// Parses the command line, runs the subcommand and maps failures to exit
/// codes: precondition and argument errors to 2, resource errors to 3, a
/// failed statistical test to 1.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace smoothfix::cli
