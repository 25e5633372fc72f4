// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tubemae/geometry/video.hpp"

namespace tubemae::geometry {

/// `count` frames at `stride` from a start drawn uniformly over every start
/// that fits. Requires count*stride <= L, else LengthError.
PointCloudVideo sample_frames(const PointCloudVideo& video, int count, int stride, std::uint64_t seed);

/// The first `count` points of every frame (with their features). Stored
/// frames carry no point order, so this is a uniform subset.
PointCloudVideo take_points(const PointCloudVideo& video, int count);

/// Scales every coordinate by one factor drawn uniformly from [lo, hi].
PointCloudVideo augment_scale(const PointCloudVideo& video, double lo, double hi, std::uint64_t seed);

/// Greedy farthest point sampling over an N*3 coordinate block.
///
/// The first index is drawn from `seed`; each next index maximizes the
/// squared distance to the selected set, ties broken by lower index.
std::vector<int> farthest_point_sample(std::span<const float> points, int count, std::uint64_t seed);

/// Same as above with an explicit first index.
std::vector<int> farthest_point_sample_from(std::span<const float> points, int count, int first);

}  // namespace tubemae::geometry
