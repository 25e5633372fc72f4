// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tubemae/backbone/decoder.hpp"
#include "tubemae/backbone/encoder.hpp"
#include "tubemae/geometry/tubes.hpp"
#include "tubemae/geometry/video.hpp"
#include "tubemae/masking/mask.hpp"
#include "tubemae/objectives/losses.hpp"
#include "tubemae/pipeline/optim.hpp"

namespace tubemae::pipeline {

struct ModelConfig {
  backbone::EncoderConfig encoder;
  backbone::DecoderConfig decoder;
  geometry::TubeConfig tubes;
  double momentum = 0.999;
  int source_frames = 24;  // L
  int points = 256;        // N

  int anchor_frames() const { return source_frames / tubes.temporal_stride; }
  int anchors_per_frame() const { return points / tubes.spatial_stride; }
  void validate() const;
};

/// Every parameterized component used during pre-training.
struct Model {
  ModelConfig config;
  backbone::EncoderPair encoders;
  backbone::Decoder decoder;
  backbone::PredictionHead head;
  objectives::ProjectionHeads heads;

  static Model init(const ModelConfig& cfg, std::uint64_t seed);

  /// Parameters updated by the optimizer: online encoder, decoder and its
  /// tokens, prediction head, projection heads.
  std::vector<dc::NamedTensor> trainable() const;
  std::vector<dc::NamedTensor> online_encoder() const;
  std::vector<dc::NamedTensor> momentum_encoder() const;
  /// trainable() followed by momentum_encoder().
  std::vector<dc::NamedTensor> all() const;
};

struct MaskConfig {
  masking::MaskStrategy strategy = masking::MaskStrategy::kFrame;
  double ratio = 0.75;
};

struct PretrainConfig {
  MaskConfig mask;
  objectives::LossConfig loss;
  objectives::LossFlags flags;
};

/// Everything one video contributes to a pre-training iteration.
struct VideoPass {
  objectives::LossTerms terms;
  objectives::CombinedLoss combined;
  dc::Tensor z_visible;  // Z_v
  dc::Tensor z_momentum;  // Z
  dc::Tensor z_geo;       // undefined when the geometry pass is skipped
  dc::Tensor z_lat;       // undefined when the latent pass is skipped
  dc::Tensor q;           // momentum global feature [1, C]
  masking::MaskPlan plan;
  masking::SplitEmbeddings split;
};

struct PassOptions {
  bool force_geometry = false;  // decode both passes even if their losses are off
  bool force_latent = false;
};

/// Forward pass with the enabled losses on one video's tubes.
VideoPass pretrain_forward(const Model& model, const geometry::TubeBatch& tubes, const masking::MaskPlan& plan,
                           const objectives::NegativeQueue& queue, const PretrainConfig& cfg,
                           const PassOptions& options = {});

enum class StepPhase { kForward, kBackward, kOptimizer, kEma, kQueue };

struct StepTrace {
  objectives::LossReport report;  // batch mean
  std::vector<std::vector<double>> pushed;  // momentum global features, in push order
};

using StepHook = std::function<void(StepPhase)>;

/// One iteration over a batch of (tubes, mask) pairs: forward and backward for
/// each video (losses averaged over the batch), optimizer step, EMA update,
/// then queue push of this iteration's momentum global features.
StepTrace pretrain_step(Model& model, Optimizer& optimizer, objectives::NegativeQueue& queue,
                        const std::vector<geometry::TubeBatch>& tubes, const std::vector<masking::MaskPlan>& plans,
                        const PretrainConfig& cfg, double lr, const StepHook& hook = {});

/// Max-pooled online encoder feature of the unmasked tubes (no graph).
std::vector<double> encode_video(const backbone::Encoder& encoder, const geometry::TubeBatch& tubes);

/// Mean disentanglement_probe over videos, Z_lat restricted to masked rows.
double measure_disentanglement(const Model& model, const std::vector<geometry::TubeBatch>& tubes,
                               const std::vector<masking::MaskPlan>& plans, const PretrainConfig& cfg);

}  // namespace tubemae::pipeline
