// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "tubemae/backbone/transformer.hpp"
#include "tubemae/embedding/p4d.hpp"

namespace tubemae::backbone {

struct DecoderConfig {
  int depth = 4;
  int heads = 8;
  int mlp_ratio = 4;
  /// When false there is no latent token bank; the latent pass is fed
  /// geometry tokens at every grid position instead.
  bool latent_tokens = true;
};

enum class TokenKind { kGeometry, kLatent };

/// One decoder shared by the geometry and latent passes. The passes differ
/// only in the tokens appended after the encoded visible embeddings.
struct Decoder {
  TransformerStack stack;
  dc::Tensor geometry_token;  // [C]
  dc::Tensor latent_tokens;   // [L'*N', C]; undefined when disabled
  embedding::PositionalMap position;  // encodes anchors of geometry tokens

  static Decoder init(int channels, int grid_rows, const DecoderConfig& cfg, Rng& rng);

  /// Runs [z_visible; tokens] through the stack and returns the token rows.
  dc::Tensor run(const dc::Tensor& z_visible, const dc::Tensor& tokens, AttentionCapture* capture = nullptr) const;

  /// Z_geo: one row per masked anchor.
  dc::Tensor decode_geometry(const dc::Tensor& z_visible, const std::vector<std::array<double, 4>>& masked_anchors,
                             int source_frames) const;
  /// Z_lat: one row per grid position, aligned with the momentum output Z.
  dc::Tensor decode_latent(const dc::Tensor& z_visible, const std::vector<std::array<double, 4>>& all_anchors,
                           int source_frames) const;

  dc::Tensor geometry_tokens(const std::vector<std::array<double, 4>>& anchors, int source_frames) const;

  void collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const;
};

/// Per-position linear head (kernel-size-1 convolution) C -> r_t*n*3,
/// producing offsets from the tube anchor.
struct PredictionHead {
  nn::Linear linear;
  int tube_frames = 0;
  int neighbors = 0;

  static PredictionHead init(int channels, int tube_frames, int neighbors, Rng& rng);
  void collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const;
};

/// P_rec as [masked, r_t*n*3]: predicted offsets plus the anchor coordinate.
dc::Tensor predict_points(const dc::Tensor& z_geo, const PredictionHead& head,
                          const std::vector<std::array<double, 4>>& masked_anchors);

}  // namespace tubemae::backbone
