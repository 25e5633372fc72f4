// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>

namespace tubemae::cli {

/// A referenced input file (checkpoint, manifest) is absent.
class MissingInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int {
  kOk = 0,
  kFailed = 1,        // a check failed or a runtime error occurred
  kConfigError = 2,   // bad configuration or arguments
  kMissingInput = 3,
};

}  // namespace tubemae::cli
