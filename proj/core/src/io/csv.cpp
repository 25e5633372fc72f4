// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/io/csv.hpp"

#include <array>
#include <cmath>

namespace tubemae::io {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header) : os_(os) {
  bool first = true;
  for (auto h : header) {
    if (!first) os_ << ',';
    first = false;
    os_ << h;
  }
  os_ << '\n';
}

}  // namespace tubemae::io
