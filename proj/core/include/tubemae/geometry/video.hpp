// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tubemae::geometry {

/// L frames of N unordered 3D points, stored frame-major as 32-bit floats.
struct PointCloudVideo {
  int frames = 0;    // L
  int points = 0;    // N per frame
  int channels = 0;  // per-point feature channels, 0 when coordinate-only
  std::vector<float> coords;    // L*N*3
  std::vector<float> features;  // L*N*channels
  std::optional<int> label;
  std::vector<int> frame_labels;  // empty or L entries

  std::span<const float> frame(int t) const {
    return std::span<const float>(coords).subspan(static_cast<std::size_t>(t) * points * 3,
                                                  static_cast<std::size_t>(points) * 3);
  }

  std::array<double, 3> point(int t, int i) const {
    const std::size_t base = (static_cast<std::size_t>(t) * points + i) * 3;
    return {coords[base], coords[base + 1], coords[base + 2]};
  }

  /// Throws ContractError if extents, buffers, or labels are inconsistent or
  /// any coordinate is non-finite.
  void validate() const;

  bool operator==(const PointCloudVideo&) const = default;
};

}  // namespace tubemae::geometry
