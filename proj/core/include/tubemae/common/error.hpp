// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tubemae {

/// Violated precondition or malformed argument.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Tensor operands whose shapes do not conform.
class DimensionError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// NaN or Inf produced by a computation.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input sequence shorter than requested.
class LengthError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// Malformed binary or text file. Carries the byte offset where decoding failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Bad run configuration (unknown key, unparsable value).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TUBEMAE_EXPECT(cond, msg)                \
  do {                                           \
    if (!(cond)) throw ::tubemae::ContractError(msg); \
  } while (0)

}  // namespace tubemae
