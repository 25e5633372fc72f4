// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pre-training objectives: Chamfer reconstruction in coordinate space,
// latent alignment against the momentum encoder, bidirectional frame-level
// motion alignment, and video-level global alignment against a queue.

#pragma once

#include <string>
#include <vector>

#include "tubemae/common/rng.hpp"
#include "tubemae/diffcore/gradcheck.hpp"
#include "tubemae/diffcore/tensor.hpp"
#include "tubemae/nn/layers.hpp"
#include "tubemae/objectives/queue.hpp"

namespace tubemae::objectives {

/// Four independent C -> C projection MLPs, applied to online features only.
struct ProjectionHeads {
  nn::Mlp latent;
  nn::Mlp motion_forward;
  nn::Mlp motion_backward;
  nn::Mlp global;

  static ProjectionHeads init(int channels, Rng& rng);
  void collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const;
};

enum class MotionDenominator {
  kStandardInclusive,  // softmax over every candidate frame, positive included
  kLiteralExclusive,   // the positive frame is left out of the denominator
};

MotionDenominator parse_motion_denominator(const std::string& name);
std::string to_string(MotionDenominator d);

struct LossConfig {
  double temperature = 0.1;
  int queue_size = 12288;
  MotionDenominator motion_denominator = MotionDenominator::kStandardInclusive;
};

struct LossFlags {
  bool geo = true;
  bool lat = true;
  bool motion = true;
  bool global = true;

  /// Pretext ablation rows B1..B7, plus "segmentation" (global term off).
  static LossFlags preset(const std::string& name);
  bool any() const { return geo || lat || motion || global; }
};

/// Mean over sets and frames of the symmetric squared-distance Chamfer term.
/// `rec` is [S, F*n_rec*3], `gt` is [S, F*n_gt*3]; both may carry gradients.
dc::Tensor chamfer_loss(const dc::Tensor& rec, const dc::Tensor& gt, int frames);

/// 1 - mean row-wise cosine(projected, stopgrad(target)).
dc::Tensor cosine_alignment_loss(const dc::Tensor& projected, const dc::Tensor& target);

/// Latent alignment: cosine_alignment_loss(heads.latent(z_lat), z).
dc::Tensor latent_loss(const dc::Tensor& z_lat, const dc::Tensor& z, const ProjectionHeads& heads);

/// Frame features from spatial max-pooling. Frames without rows are absent.
struct FrameFeatures {
  dc::Tensor features;      // [present frames, C]
  std::vector<int> frames;  // anchor-frame id per row, ascending
  int total_frames = 0;
};

/// `row_frame[i]` is the anchor frame of row i of `z`.
FrameFeatures pool_frames(const dc::Tensor& z, const std::vector<int>& row_frame, int total_frames);
/// Grid layout shortcut: rows are frame-major with `per_frame` rows each.
FrameFeatures pool_frames(const dc::Tensor& z, int total_frames);

/// Bidirectional InfoNCE between projected online frame features and
/// neighbouring momentum frame features of the same video.
dc::Tensor motion_loss(const FrameFeatures& online, const FrameFeatures& target, const ProjectionHeads& heads,
                       const LossConfig& cfg);

/// Unit-normalized max over all rows -> [1, C].
dc::Tensor pool_global(const dc::Tensor& z);

/// InfoNCE of heads.global(q_hat) against q (positive) and the queue entries.
dc::Tensor global_loss(const dc::Tensor& q_hat, const dc::Tensor& q, const NegativeQueue& queue,
                       const ProjectionHeads& heads, const LossConfig& cfg);

/// Same as global_loss with an already-projected query.
dc::Tensor info_nce(const dc::Tensor& query, const dc::Tensor& positive, const NegativeQueue& queue,
                    double temperature);

struct LossTerms {
  dc::Tensor geo;  // undefined when disabled
  dc::Tensor lat;
  dc::Tensor motion;
  dc::Tensor global;
};

struct LossReport {
  double geo = 0.0;
  double lat = 0.0;
  double motion = 0.0;
  double global = 0.0;
  double total = 0.0;
};

struct CombinedLoss {
  dc::Tensor total;
  LossReport report;
};

/// Unweighted sum of the defined terms.
CombinedLoss total_loss(const LossTerms& terms);

/// Mean absolute row-wise cosine similarity between paired features.
double disentanglement_probe(const dc::Tensor& z_geo, const dc::Tensor& z_lat);

}  // namespace tubemae::objectives
