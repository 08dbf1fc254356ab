// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace smoothfix {

/// Bad input: unknown names, out-of-range parameters, malformed files.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A sampler refused to run because a required model condition does not hold
/// (or could not be established).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation hit its resource cap (node budget).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace smoothfix
