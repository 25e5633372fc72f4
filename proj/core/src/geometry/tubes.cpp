// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/geometry/tubes.hpp"

#include <algorithm>
#include <string>

#include "tubemae/common/error.hpp"
#include "tubemae/common/rng.hpp"
#include "tubemae/geometry/sampling.hpp"

namespace tubemae::geometry {

void TubeConfig::validate() const {
  TUBEMAE_EXPECT(radius > 0.0, "tube radius must be positive");
  TUBEMAE_EXPECT(tube_frames >= 1 && tube_frames % 2 == 1, "tube_frames must be odd and >= 1");
  TUBEMAE_EXPECT(neighbors >= 1, "neighbors must be >= 1");
  TUBEMAE_EXPECT(spatial_stride >= 1 && temporal_stride >= 1, "strides must be >= 1");
}

TubeBatch build_tubes(const PointCloudVideo& video, const TubeConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  video.validate();
  TUBEMAE_EXPECT(video.points % cfg.spatial_stride == 0,
                 "spatial_stride " + std::to_string(cfg.spatial_stride) + " does not divide N=" +
                     std::to_string(video.points));
  TUBEMAE_EXPECT(video.frames % cfg.temporal_stride == 0,
                 "temporal_stride " + std::to_string(cfg.temporal_stride) + " does not divide L=" +
                     std::to_string(video.frames));

  TubeBatch batch;
  batch.source_frames = video.frames;
  batch.anchor_frames = video.frames / cfg.temporal_stride;
  batch.anchors_per_frame = video.points / cfg.spatial_stride;
  batch.tube_frames = cfg.tube_frames;
  batch.neighbors = cfg.neighbors;
  batch.feature_channels = video.channels;
  batch.radius = cfg.radius;

  const int half = (cfg.tube_frames - 1) / 2;
  const double r2 = cfg.radius * cfg.radius;
  const auto total_members = static_cast<std::size_t>(batch.anchor_count()) * batch.members_per_anchor();
  batch.anchors.reserve(static_cast<std::size_t>(batch.anchor_count()));
  batch.members.resize(total_members);
  batch.displacements.resize(total_members);
  batch.ground_truth.resize(total_members * 3);
  batch.member_features.resize(total_members * static_cast<std::size_t>(video.channels));

  Rng rng(seed);
  std::vector<std::pair<double, int>> candidates;
  candidates.reserve(static_cast<std::size_t>(video.points));

  for (int j = 0; j < batch.anchor_frames; ++j) {
    const int t = anchor_source_frame(j, cfg);
    const auto frame = video.frame(t);
    const int first = static_cast<int>(rng.below(static_cast<std::uint64_t>(video.points)));
    batch.fps_first.push_back(first);
    const auto picks = farthest_point_sample_from(frame, batch.anchors_per_frame, first);

    for (int k = 0; k < batch.anchors_per_frame; ++k) {
      const int anchor = j * batch.anchors_per_frame + k;
      const auto a = video.point(t, picks[static_cast<std::size_t>(k)]);
      batch.anchors.push_back({a[0], a[1], a[2], static_cast<double>(t)});

      for (int slot = 0; slot < cfg.tube_frames; ++slot) {
        const int f = std::clamp(t - half + slot, 0, video.frames - 1);
        candidates.clear();
        for (int i = 0; i < video.points; ++i) {
          const auto p = video.point(f, i);
          const double dx = p[0] - a[0], dy = p[1] - a[1], dz = p[2] - a[2];
          const double d2 = dx * dx + dy * dy + dz * dz;
          if (d2 < r2) candidates.emplace_back(d2, i);
        }
        std::sort(candidates.begin(), candidates.end());

        TubeMember fallback{t, picks[static_cast<std::size_t>(k)]};
        const int found = std::min(static_cast<int>(candidates.size()), cfg.neighbors);
        for (int m = 0; m < cfg.neighbors; ++m) {
          TubeMember member = fallback;
          if (found > 0) member = TubeMember{f, candidates[static_cast<std::size_t>(m < found ? m : 0)].second};
          const std::size_t idx = batch.member_index(anchor, slot, m);
          batch.members[idx] = member;
          const auto p = video.point(member.frame, member.point);
          batch.displacements[idx] = {p[0] - a[0], p[1] - a[1], p[2] - a[2], static_cast<double>(member.frame - t)};
          std::copy(p.begin(), p.end(), batch.ground_truth.begin() + static_cast<std::ptrdiff_t>(idx * 3));
          if (video.channels > 0) {
            const std::size_t src = (static_cast<std::size_t>(member.frame) * video.points + member.point) * video.channels;
            std::copy_n(video.features.begin() + static_cast<std::ptrdiff_t>(src), video.channels,
                        batch.member_features.begin() + static_cast<std::ptrdiff_t>(idx * video.channels));
          }
        }
      }
    }
  }
  return batch;
}

}  // namespace tubemae::geometry
