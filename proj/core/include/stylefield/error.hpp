// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace stylefield {

/// Raised when an operation receives arguments that violate its preconditions
/// (shape mismatches, non-unit ray directions, empty masks, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for malformed run configuration, missing inputs, or unreadable files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define STYLEFIELD_VALIDATE(cond, msg)                        \
  do {                                                        \
    if (!(cond)) throw ::stylefield::ValidationError((msg));  \
  } while (false)

}  // namespace stylefield
