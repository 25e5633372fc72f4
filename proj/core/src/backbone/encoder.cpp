// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/backbone/encoder.hpp"

#include "tubemae/common/error.hpp"
#include "tubemae/diffcore/ops.hpp"

namespace tubemae::backbone {

namespace {

dc::Tensor copy_leaf(const dc::Tensor& t, bool grad) { return t.defined() ? t.clone(grad) : dc::Tensor(); }

nn::Linear copy_linear(const nn::Linear& l, bool grad) { return {copy_leaf(l.weight, grad), copy_leaf(l.bias, grad)}; }
nn::LayerNorm copy_norm(const nn::LayerNorm& n, bool grad) { return {copy_leaf(n.gamma, grad), copy_leaf(n.beta, grad)}; }

}  // namespace

Encoder Encoder::init(const EncoderConfig& cfg, Rng& rng) {
  Encoder e;
  e.p4d = embedding::P4DKernel::init(cfg.channels, cfg.feature_channels, cfg.aggregation, cfg.p4d_bias, rng);
  e.position = embedding::PositionalMap::init(cfg.channels, rng);
  e.stack = TransformerStack::init(cfg.depth, cfg.channels, cfg.heads, cfg.mlp_ratio, rng);
  return e;
}

embedding::EmbeddingBatch Encoder::embed(const geometry::TubeBatch& tubes) const {
  return embedding::positional_encode(embedding::p4d_embed(tubes, p4d), position);
}

dc::Tensor Encoder::encode(const dc::Tensor& tokens, AttentionCapture* capture) const {
  return stack.forward(tokens, capture);
}

void Encoder::collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const {
  p4d.collect(out, prefix + "p4d.");
  position.collect(out, prefix + "position.");
  stack.collect(out, prefix + "stack.");
}

Encoder Encoder::detached_copy() const { return copy(false); }

Encoder Encoder::copy(bool requires_grad) const {
  const bool g = requires_grad;
  Encoder e;
  e.p4d.aggregation = p4d.aggregation;
  e.p4d.displacement_weight = copy_leaf(p4d.displacement_weight, g);
  e.p4d.feature_weight = copy_leaf(p4d.feature_weight, g);
  e.p4d.bias = copy_leaf(p4d.bias, g);
  e.position = {copy_leaf(position.weight, g), copy_leaf(position.bias, g)};
  e.stack = stack;
  for (auto& layer : e.stack.layers()) {
    layer.norm1 = copy_norm(layer.norm1, g);
    layer.query = copy_linear(layer.query, g);
    layer.key = copy_linear(layer.key, g);
    layer.value = copy_linear(layer.value, g);
    layer.output = copy_linear(layer.output, g);
    layer.norm2 = copy_norm(layer.norm2, g);
    layer.mlp.fc1 = copy_linear(layer.mlp.fc1, g);
    layer.mlp.fc2 = copy_linear(layer.mlp.fc2, g);
  }
  return e;
}

EncoderPair EncoderPair::init(const EncoderConfig& cfg, double momentum_coeff, Rng& rng) {
  TUBEMAE_EXPECT(momentum_coeff >= 0.0 && momentum_coeff <= 1.0, "EMA momentum must lie in [0, 1]");
  EncoderPair pair;
  pair.online = Encoder::init(cfg, rng);
  pair.momentum = pair.online.detached_copy();
  pair.momentum_coeff = momentum_coeff;
  return pair;
}

dc::Tensor EncoderPair::encode_online(const embedding::EmbeddingBatch& visible) const {
  return online.encode(visible.embeddings);
}

dc::Tensor EncoderPair::encode_momentum(const embedding::EmbeddingBatch& full) const {
  dc::NoGradGuard guard;
  return dc::stop_gradient(momentum.encode(full.embeddings));
}

embedding::EmbeddingBatch EncoderPair::embed_momentum(const geometry::TubeBatch& tubes) const {
  dc::NoGradGuard guard;
  return momentum.embed(tubes);
}

void ema_update(std::vector<dc::NamedTensor>& shadow, const std::vector<dc::NamedTensor>& online, double m) {
  TUBEMAE_EXPECT(shadow.size() == online.size(), "EMA: parameter lists differ in length");
  for (std::size_t i = 0; i < shadow.size(); ++i) {
    auto dst = shadow[i].tensor.mutable_data();
    const auto src = online[i].tensor.data();
    TUBEMAE_EXPECT(dst.size() == src.size(), "EMA: shape mismatch at " + shadow[i].name);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = m * dst[j] + (1.0 - m) * src[j];
  }
}

void EncoderPair::ema_update() {
  std::vector<dc::NamedTensor> shadow, source;
  momentum.collect(shadow, "");
  online.collect(source, "");
  backbone::ema_update(shadow, source, momentum_coeff);
}

}  // namespace tubemae::backbone
