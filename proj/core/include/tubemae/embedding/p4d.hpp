// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Point 4D convolution: each tube collapses to one C-dimensional embedding by
// transforming every member's spatio-temporal displacement (and optional
// feature) and aggregating over members.

#pragma once

#include <array>
#include <string>
#include <vector>

#include "tubemae/common/rng.hpp"
#include "tubemae/diffcore/gradcheck.hpp"
#include "tubemae/diffcore/tensor.hpp"
#include "tubemae/geometry/tubes.hpp"

namespace tubemae::embedding {

enum class Aggregation {
  kLiteralSum,  // f' = sum_members (W_d d + W_f f)
  kMlpMax,      // f' = max_members relu(W_d d + W_f f + b)
};

Aggregation parse_aggregation(const std::string& name);
std::string to_string(Aggregation a);

/// Weights are stored input-major ([4, C], [C_in, C]) so rows multiply on the left.
struct P4DKernel {
  dc::Tensor displacement_weight;  // [4, C]
  dc::Tensor feature_weight;       // [C_in, C], undefined for coordinate-only input
  dc::Tensor bias;                 // [C], undefined when disabled
  Aggregation aggregation = Aggregation::kLiteralSum;

  static P4DKernel init(int channels, int feature_channels, Aggregation aggregation, bool with_bias, Rng& rng);
  int channels() const { return static_cast<int>(displacement_weight.dim(1)); }
  void collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const;
};

/// Learnable linear map from normalized anchor (x, y, z, t) to C.
struct PositionalMap {
  dc::Tensor weight;  // [4, C]
  dc::Tensor bias;    // [C]

  static PositionalMap init(int channels, Rng& rng);
  void collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const;
};

struct EmbeddingBatch {
  dc::Tensor embeddings;  // [L'*N', C], frame-major
  int anchor_frames = 0;
  int anchors_per_frame = 0;  // 0 when rows per frame vary (video-level masking)
  std::vector<std::array<double, 4>> anchors;  // raw (x, y, z, t), one per row
  int source_frames = 0;

  int rows() const { return static_cast<int>(anchors.size()); }
};

/// Displacements scaled into [-1, 1]: spatial by the radius, temporal by (r_t-1)/2.
std::array<double, 4> normalized_displacement(const geometry::TubeBatch& tubes, std::size_t member);

/// Anchor coordinates with t mapped to [0, 1] over the source length, as [rows, 4].
dc::Tensor normalized_anchors(const std::vector<std::array<double, 4>>& anchors, int source_frames);

EmbeddingBatch p4d_embed(const geometry::TubeBatch& tubes, const P4DKernel& kernel);

EmbeddingBatch positional_encode(const EmbeddingBatch& batch, const PositionalMap& map);

}  // namespace tubemae::embedding
