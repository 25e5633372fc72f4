// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "tubemae/backbone/transformer.hpp"
#include "tubemae/embedding/p4d.hpp"
#include "tubemae/geometry/tubes.hpp"

namespace tubemae::backbone {

struct EncoderConfig {
  int channels = 128;
  int depth = 5;
  int heads = 8;
  int mlp_ratio = 4;
  int feature_channels = 0;
  embedding::Aggregation aggregation = embedding::Aggregation::kLiteralSum;
  bool p4d_bias = true;
};

/// Tube embedding (P4D + positional map) followed by a transformer stack.
struct Encoder {
  embedding::P4DKernel p4d;
  embedding::PositionalMap position;
  TransformerStack stack;

  static Encoder init(const EncoderConfig& cfg, Rng& rng);

  /// Full embeddings E for every tube, positional encoding included.
  embedding::EmbeddingBatch embed(const geometry::TubeBatch& tubes) const;
  dc::Tensor encode(const dc::Tensor& tokens, AttentionCapture* capture = nullptr) const;

  void collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const;
  /// Value copy whose leaves never require gradients.
  Encoder detached_copy() const;
  /// Deep value copy with fresh leaves.
  Encoder copy(bool requires_grad) const;
};

/// Online encoder plus its EMA shadow.
struct EncoderPair {
  Encoder online;
  Encoder momentum;
  double momentum_coeff = 0.999;

  /// The momentum twin starts as an exact copy of the online encoder.
  static EncoderPair init(const EncoderConfig& cfg, double momentum_coeff, Rng& rng);

  /// Z_v: online encoding of the visible embeddings.
  dc::Tensor encode_online(const embedding::EmbeddingBatch& visible) const;
  /// Z: momentum encoding of full embeddings; never recorded on the graph.
  dc::Tensor encode_momentum(const embedding::EmbeddingBatch& full) const;
  /// Momentum embedding of every tube (no graph).
  embedding::EmbeddingBatch embed_momentum(const geometry::TubeBatch& tubes) const;

  /// theta_m <- m * theta_m + (1 - m) * theta_online, elementwise.
  void ema_update();
};

/// Applies the EMA rule to parallel parameter lists.
void ema_update(std::vector<dc::NamedTensor>& shadow, const std::vector<dc::NamedTensor>& online, double m);

}  // namespace tubemae::backbone
