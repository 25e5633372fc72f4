// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// PCV1 layout (little-endian):
//   "PCV1" | u32 L | u32 N | u32 C_in | u8 flags
//   f32 coords[L*N*3] frame-major
//   f32 features[L*N*C_in]   if flags & 1
//   u16 label                if flags & 2
//   u16 frame_labels[L]      if flags & 4
// The byte length is fully determined by the header.

#pragma once

#include <cstdint>
#include <string>

#include "tubemae/geometry/video.hpp"

namespace tubemae::dataio {

inline constexpr std::uint8_t kHasFeatures = 1;
inline constexpr std::uint8_t kHasLabel = 2;
inline constexpr std::uint8_t kHasFrameLabels = 4;
inline constexpr std::size_t kVideoHeaderBytes = 17;

std::string encode_video(const geometry::PointCloudVideo& video);
geometry::PointCloudVideo decode_video(const std::string& bytes);

void write_video(const std::string& path, const geometry::PointCloudVideo& video);
geometry::PointCloudVideo read_video(const std::string& path);

}  // namespace tubemae::dataio
