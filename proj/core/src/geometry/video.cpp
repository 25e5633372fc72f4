// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/geometry/video.hpp"

#include <cmath>
#include <string>

#include "tubemae/common/error.hpp"

namespace tubemae::geometry {

void PointCloudVideo::validate() const {
  TUBEMAE_EXPECT(frames >= 1 && points >= 1, "video needs at least one frame and one point");
  TUBEMAE_EXPECT(channels >= 0, "negative feature channel count");
  const auto expected = static_cast<std::size_t>(frames) * points * 3;
  TUBEMAE_EXPECT(coords.size() == expected, "coordinate buffer holds " + std::to_string(coords.size()) +
                                                " values, expected " + std::to_string(expected));
  TUBEMAE_EXPECT(features.size() == static_cast<std::size_t>(frames) * points * channels,
                 "feature buffer size does not match L*N*channels");
  TUBEMAE_EXPECT(frame_labels.empty() || frame_labels.size() == static_cast<std::size_t>(frames),
                 "frame_labels must have one entry per frame");
  for (float v : coords) {
    TUBEMAE_EXPECT(std::isfinite(v), "non-finite coordinate");
  }
}

}  // namespace tubemae::geometry
