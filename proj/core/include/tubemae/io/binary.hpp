// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Fixed little-endian encoding, independent of host byte order.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tubemae::io {

class ByteWriter {
 public:
  void bytes(std::string_view raw) { out_.insert(out_.end(), raw.begin(), raw.end()); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  void str(std::string_view s);  // u32 length prefix

  const std::string& buffer() const { return out_; }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

/// Bounds-checked reader; every failure throws FormatError with the offset.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t n, const char* what);
  std::uint8_t u8(const char* what);
  std::uint16_t u16(const char* what);
  std::uint32_t u32(const char* what);
  std::uint64_t u64(const char* what);
  float f32(const char* what);
  double f64(const char* what);
  std::string str(const char* what);

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return data_.size() - offset_; }
  /// Throws unless every byte has been consumed.
  void expect_end() const;

 private:
  std::uint64_t little(std::size_t width, const char* what);

  std::string_view data_;
  std::size_t offset_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace tubemae::io
