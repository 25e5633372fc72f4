// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/geometry/sampling.hpp"

#include <limits>
#include <string>

#include "tubemae/common/error.hpp"
#include "tubemae/common/rng.hpp"

namespace tubemae::geometry {

PointCloudVideo sample_frames(const PointCloudVideo& video, int count, int stride, std::uint64_t seed) {
  TUBEMAE_EXPECT(count >= 1 && stride >= 1, "sample_frames: count and stride must be positive");
  if (static_cast<long long>(count) * stride > video.frames) {
    throw LengthError("sample_frames: video has " + std::to_string(video.frames) + " frames, need " +
                      std::to_string(count) + "x" + std::to_string(stride));
  }
  const int span = (count - 1) * stride + 1;
  Rng rng(seed);
  const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(video.frames - span + 1)));

  PointCloudVideo out;
  out.frames = count;
  out.points = video.points;
  out.channels = video.channels;
  out.label = video.label;
  const std::size_t frame_values = static_cast<std::size_t>(video.points) * 3;
  const std::size_t frame_features = static_cast<std::size_t>(video.points) * video.channels;
  out.coords.reserve(frame_values * count);
  out.features.reserve(frame_features * count);
  for (int i = 0; i < count; ++i) {
    const int t = start + i * stride;
    out.coords.insert(out.coords.end(), video.coords.begin() + t * frame_values,
                      video.coords.begin() + (t + 1) * frame_values);
    if (video.channels > 0) {
      out.features.insert(out.features.end(), video.features.begin() + t * frame_features,
                          video.features.begin() + (t + 1) * frame_features);
    }
    if (!video.frame_labels.empty()) out.frame_labels.push_back(video.frame_labels[static_cast<std::size_t>(t)]);
  }
  return out;
}

PointCloudVideo take_points(const PointCloudVideo& video, int count) {
  TUBEMAE_EXPECT(count >= 1 && count <= video.points,
                 "take_points: count " + std::to_string(count) + " outside [1, " + std::to_string(video.points) + "]");
  if (count == video.points) return video;
  PointCloudVideo out = video;
  out.points = count;
  out.coords.clear();
  out.features.clear();
  const auto n = static_cast<std::size_t>(count);
  const auto c = static_cast<std::size_t>(video.channels);
  for (int t = 0; t < video.frames; ++t) {
    const std::size_t base = static_cast<std::size_t>(t) * static_cast<std::size_t>(video.points);
    out.coords.insert(out.coords.end(), video.coords.begin() + static_cast<std::ptrdiff_t>(base * 3),
                      video.coords.begin() + static_cast<std::ptrdiff_t>((base + n) * 3));
    if (c > 0)
      out.features.insert(out.features.end(), video.features.begin() + static_cast<std::ptrdiff_t>(base * c),
                          video.features.begin() + static_cast<std::ptrdiff_t>((base + n) * c));
  }
  return out;
}

PointCloudVideo augment_scale(const PointCloudVideo& video, double lo, double hi, std::uint64_t seed) {
  TUBEMAE_EXPECT(lo > 0.0 && lo <= hi, "augment_scale: need 0 < lo <= hi");
  Rng rng(seed);
  const double s = lo == hi ? lo : rng.uniform(lo, hi);
  PointCloudVideo out = video;
  if (s == 1.0) return out;
  for (float& v : out.coords) v = static_cast<float>(static_cast<double>(v) * s);
  return out;
}

std::vector<int> farthest_point_sample_from(std::span<const float> points, int count, int first) {
  const int n = static_cast<int>(points.size() / 3);
  TUBEMAE_EXPECT(points.size() % 3 == 0, "farthest_point_sample: coordinates must be N*3");
  TUBEMAE_EXPECT(count >= 1 && count <= n, "farthest_point_sample: need 1 <= count <= N (count=" +
                                               std::to_string(count) + ", N=" + std::to_string(n) + ")");
  TUBEMAE_EXPECT(first >= 0 && first < n, "farthest_point_sample: first index out of range");

  std::vector<double> min_d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<int> picked;
  picked.reserve(static_cast<std::size_t>(count));
  int current = first;
  for (int s = 0; s < count; ++s) {
    picked.push_back(current);
    min_d2[static_cast<std::size_t>(current)] = -1.0;
    const double cx = points[3 * current], cy = points[3 * current + 1], cz = points[3 * current + 2];
    int best = -1;
    double best_d2 = -1.0;
    for (int i = 0; i < n; ++i) {
      auto& md = min_d2[static_cast<std::size_t>(i)];
      if (md < 0.0) continue;
      const double dx = points[3 * i] - cx, dy = points[3 * i + 1] - cy, dz = points[3 * i + 2] - cz;
      const double d2 = dx * dx + dy * dy + dz * dz;
      if (d2 < md) md = d2;
      if (md > best_d2) {
        best_d2 = md;
        best = i;
      }
    }
    current = best;
  }
  return picked;
}

std::vector<int> farthest_point_sample(std::span<const float> points, int count, std::uint64_t seed) {
  const auto n = points.size() / 3;
  TUBEMAE_EXPECT(n >= 1, "farthest_point_sample: empty point set");
  Rng rng(seed);
  return farthest_point_sample_from(points, count, static_cast<int>(rng.below(n)));
}

}  // namespace tubemae::geometry
