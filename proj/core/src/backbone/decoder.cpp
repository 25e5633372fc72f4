// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/backbone/decoder.hpp"

#include "tubemae/common/error.hpp"
#include "tubemae/diffcore/ops.hpp"
#include "tubemae/nn/init.hpp"

namespace tubemae::backbone {

Decoder Decoder::init(int channels, int grid_rows, const DecoderConfig& cfg, Rng& rng) {
  TUBEMAE_EXPECT(grid_rows >= 1, "decoder needs a non-empty anchor grid");
  Decoder d;
  d.stack = TransformerStack::init(cfg.depth, channels, cfg.heads, cfg.mlp_ratio, rng);
  d.geometry_token = nn::normal_param({channels}, 0.02, rng);
  if (cfg.latent_tokens) d.latent_tokens = nn::normal_param({grid_rows, channels}, 0.02, rng);
  d.position = embedding::PositionalMap::init(channels, rng);
  return d;
}

dc::Tensor Decoder::run(const dc::Tensor& z_visible, const dc::Tensor& tokens, AttentionCapture* capture) const {
  const dc::Index visible = z_visible.dim(0);
  const dc::Tensor seq = dc::concat({z_visible, tokens}, 0);
  return dc::narrow(stack.forward(seq, capture), 0, visible, tokens.dim(0));
}

dc::Tensor Decoder::geometry_tokens(const std::vector<std::array<double, 4>>& anchors, int source_frames) const {
  const auto n = static_cast<dc::Index>(anchors.size());
  const dc::Tensor pos =
      dc::linear(embedding::normalized_anchors(anchors, source_frames), position.weight, position.bias);
  return dc::add(dc::repeat_rows(geometry_token, n), pos);
}

dc::Tensor Decoder::decode_geometry(const dc::Tensor& z_visible,
                                    const std::vector<std::array<double, 4>>& masked_anchors,
                                    int source_frames) const {
  TUBEMAE_EXPECT(!masked_anchors.empty(), "geometry pass needs at least one masked position");
  return run(z_visible, geometry_tokens(masked_anchors, source_frames));
}

dc::Tensor Decoder::decode_latent(const dc::Tensor& z_visible, const std::vector<std::array<double, 4>>& all_anchors,
                                  int source_frames) const {
  if (!latent_tokens.defined()) return run(z_visible, geometry_tokens(all_anchors, source_frames));
  TUBEMAE_EXPECT(latent_tokens.dim(0) == static_cast<dc::Index>(all_anchors.size()),
                 "latent token bank does not match the anchor grid");
  return run(z_visible, latent_tokens);
}

void Decoder::collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const {
  stack.collect(out, prefix + "stack.");
  out.push_back({prefix + "geometry_token", geometry_token});
  if (latent_tokens.defined()) out.push_back({prefix + "latent_tokens", latent_tokens});
  position.collect(out, prefix + "position.");
}

PredictionHead PredictionHead::init(int channels, int tube_frames, int neighbors, Rng& rng) {
  PredictionHead h;
  h.linear = nn::Linear::init(channels, tube_frames * neighbors * 3, rng);
  h.tube_frames = tube_frames;
  h.neighbors = neighbors;
  return h;
}

void PredictionHead::collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const {
  linear.collect(out, prefix);
}

dc::Tensor predict_points(const dc::Tensor& z_geo, const PredictionHead& head,
                          const std::vector<std::array<double, 4>>& masked_anchors) {
  const auto m = static_cast<dc::Index>(masked_anchors.size());
  TUBEMAE_EXPECT(z_geo.rank() == 2 && z_geo.dim(0) == m, "predict_points: one feature row per masked anchor");
  const dc::Index width = static_cast<dc::Index>(head.tube_frames) * head.neighbors * 3;
  TUBEMAE_EXPECT(head.linear.weight.dim(1) == width, "predict_points: head width does not match r_t*n*3");
  std::vector<double> base(static_cast<std::size_t>(m * width));
  for (dc::Index r = 0; r < m; ++r) {
    const auto& a = masked_anchors[static_cast<std::size_t>(r)];
    for (dc::Index j = 0; j < width; ++j) base[static_cast<std::size_t>(r * width + j)] = a[static_cast<std::size_t>(j % 3)];
  }
  return dc::add(head.linear(z_geo), dc::Tensor::from({m, width}, std::move(base)));
}

}  // namespace tubemae::backbone
