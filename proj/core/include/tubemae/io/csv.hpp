// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

namespace tubemae::io {

/// Shortest representation that round-trips; locale independent.
std::string format_number(double value);

/// Comma-separated rows with a fixed header. Numbers go through
/// format_number so identical runs produce identical bytes.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header);

  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((emit(fields, first)), ...);
    os_ << '\n';
  }

 private:
  template <typename T>
  void emit(const T& value, bool& first) {
    if (!first) os_ << ',';
    first = false;
    if constexpr (std::is_floating_point_v<T>) {
      os_ << format_number(static_cast<double>(value));
    } else if constexpr (std::is_integral_v<T>) {
      os_ << value;
    } else {
      os_ << std::string_view(value);
    }
  }

  std::ostream& os_;
};

}  // namespace tubemae::io
