// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tubemae/geometry/video.hpp"

namespace tubemae::geometry {

struct TubeConfig {
  double radius = 0.5;      // r_s, coordinate units; membership is dist < radius
  int tube_frames = 3;      // r_t, odd
  int neighbors = 32;       // points kept per anchor per tube frame
  int spatial_stride = 32;  // anchors per frame = N / spatial_stride
  int temporal_stride = 2;  // anchor frames = L / temporal_stride

  void validate() const;
};

struct TubeMember {
  int frame = 0;  // source frame index
  int point = 0;  // index within that frame
};

/// Anchors and their spatio-temporal neighborhoods.
///
/// Anchors are laid out frame-major: anchor (j, k) is the k-th FPS sample of
/// anchor frame j, at flat index j*anchors_per_frame + k. Each anchor owns
/// tube_frames*neighbors member slots, slot-major by window frame.
struct TubeBatch {
  int source_frames = 0;      // L
  int anchor_frames = 0;      // L'
  int anchors_per_frame = 0;  // N'
  int tube_frames = 0;        // r_t
  int neighbors = 0;          // n
  int feature_channels = 0;
  double radius = 0.0;

  std::vector<std::array<double, 4>> anchors;  // (x, y, z, t) per anchor
  std::vector<TubeMember> members;             // anchors * r_t * n
  std::vector<std::array<double, 4>> displacements;  // raw (dx, dy, dz, dt) per member
  std::vector<double> ground_truth;            // anchors * r_t * n * 3
  std::vector<double> member_features;         // anchors * r_t * n * channels
  std::vector<int> fps_first;                  // FPS start index per anchor frame

  int anchor_count() const { return anchor_frames * anchors_per_frame; }
  int members_per_anchor() const { return tube_frames * neighbors; }
  std::size_t member_index(int anchor, int slot, int k) const {
    return (static_cast<std::size_t>(anchor) * tube_frames + slot) * neighbors + k;
  }
};

/// Frame index of anchor frame `j` in the source video.
inline int anchor_source_frame(int j, const TubeConfig& cfg) { return j * cfg.temporal_stride; }

/// Builds point tubes around FPS anchors.
///
/// Window frames outside [0, L) clamp to the nearest valid frame; the
/// recorded member frame and dt always use the real frame index, so every
/// member satisfies dist < radius and |dt| <= (r_t-1)/2. When more than
/// `neighbors` points qualify the nearest are kept (lower index on ties);
/// fewer are padded by repeating the nearest member, and an empty window
/// frame falls back to the anchor point itself.
TubeBatch build_tubes(const PointCloudVideo& video, const TubeConfig& cfg, std::uint64_t seed);

}  // namespace tubemae::geometry
