// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tubemae/embedding/p4d.hpp"
#include "tubemae/geometry/tubes.hpp"

namespace tubemae::masking {

enum class MaskStrategy {
  kFrame,  // every frame masked at the same ratio
  kVideo,  // one global draw over the whole L' x N' grid
  kBlock,  // per frame, a seed anchor and its nearest anchors are masked
};

MaskStrategy parse_strategy(const std::string& name);
std::string to_string(MaskStrategy s);

struct MaskPlan {
  MaskStrategy strategy = MaskStrategy::kFrame;
  double ratio = 0.75;
  int frames = 0;     // L'
  int per_frame = 0;  // N'
  std::uint64_t seed = 0;
  std::vector<char> visible;  // frame-major L' x N' grid, 1 = visible

  bool is_visible(int frame, int k) const {
    return visible[static_cast<std::size_t>(frame) * per_frame + k] != 0;
  }
  int visible_count() const;
  int visible_in_frame(int frame) const;
  std::vector<int> visible_indices() const;  // ascending flat indices
  std::vector<int> masked_indices() const;
};

/// round((1 - ratio) * per_frame); zero is a contract violation.
int visible_per_frame(int per_frame, double ratio);

/// Builds a plan for an L' x N' anchor grid. Block strategy needs the anchor
/// coordinates (frame-major, as produced by build_tubes).
MaskPlan make_mask(int frames, int per_frame, MaskStrategy strategy, double ratio, std::uint64_t seed,
                   const std::vector<std::array<double, 4>>* anchors = nullptr);

struct SplitEmbeddings {
  embedding::EmbeddingBatch visible;  // rows in ascending flat-index order
  std::vector<int> visible_index;
  std::vector<int> masked_index;
  std::vector<std::array<double, 4>> masked_anchors;
  std::vector<double> masked_ground_truth;  // masked * r_t * n * 3
  std::vector<int> visible_frame;           // anchor-frame id per visible row
};

SplitEmbeddings split_embeddings(const embedding::EmbeddingBatch& batch, const MaskPlan& plan,
                                 const geometry::TubeBatch& tubes);

}  // namespace tubemae::masking
