// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/io/binary.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <sstream>

#include "tubemae/common/error.hpp"

namespace tubemae::io {

namespace {

void put_little(std::string& out, std::uint64_t v, std::size_t width) {
  for (std::size_t i = 0; i < width; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}

}  // namespace

void ByteWriter::u16(std::uint16_t v) { put_little(out_, v, 2); }
void ByteWriter::u32(std::uint32_t v) { put_little(out_, v, 4); }
void ByteWriter::u64(std::uint64_t v) { put_little(out_, v, 8); }
void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes(s);
}

std::string_view ByteReader::bytes(std::size_t n, const char* what) {
  if (remaining() < n) {
    throw FormatError(std::string("truncated input while reading ") + what, offset_);
  }
  const auto view = data_.substr(offset_, n);
  offset_ += n;
  return view;
}

std::uint64_t ByteReader::little(std::size_t width, const char* what) {
  const auto raw = bytes(width, what);
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(raw[i])) << (8 * i);
  return v;
}

std::uint8_t ByteReader::u8(const char* what) { return static_cast<std::uint8_t>(little(1, what)); }
std::uint16_t ByteReader::u16(const char* what) { return static_cast<std::uint16_t>(little(2, what)); }
std::uint32_t ByteReader::u32(const char* what) { return static_cast<std::uint32_t>(little(4, what)); }
std::uint64_t ByteReader::u64(const char* what) { return little(8, what); }
float ByteReader::f32(const char* what) { return std::bit_cast<float>(u32(what)); }
double ByteReader::f64(const char* what) { return std::bit_cast<double>(u64(what)); }

std::string ByteReader::str(const char* what) {
  const std::uint32_t n = u32(what);
  return std::string(bytes(n, what));
}

void ByteReader::expect_end() const {
  if (remaining() != 0) throw FormatError("unexpected trailing bytes", offset_);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace tubemae::io
