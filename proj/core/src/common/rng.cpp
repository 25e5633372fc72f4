// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/common/rng.hpp"

#include <cmath>
#include <numbers>

namespace tubemae {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name, std::uint64_t a, std::uint64_t b) {
  const std::uint64_t base = mix64(seed ^ mix64(fnv1a64(name)));
  return mix64(mix64(base ^ mix64(a)) ^ mix64(b ^ 0x5851f42d4c957f2dULL));
}

Rng Rng::stream(std::uint64_t seed, std::string_view name) {
  return Rng(mix64(seed ^ mix64(fnv1a64(name))));
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t r = engine_();
  while (r >= limit) r = engine_();
  return r % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace tubemae
