// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/backbone/transformer.hpp"

#include <cmath>
#include <ostream>

#include "tubemae/common/error.hpp"
#include "tubemae/diffcore/ops.hpp"
#include "tubemae/io/csv.hpp"

namespace tubemae::backbone {

void TransformerLayer::collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const {
  norm1.collect(out, prefix + "norm1.");
  query.collect(out, prefix + "query.");
  key.collect(out, prefix + "key.");
  value.collect(out, prefix + "value.");
  output.collect(out, prefix + "output.");
  norm2.collect(out, prefix + "norm2.");
  mlp.collect(out, prefix + "mlp.");
}

TransformerStack TransformerStack::init(int depth, int channels, int heads, int mlp_ratio, Rng& rng) {
  TUBEMAE_EXPECT(depth >= 0, "transformer depth must be >= 0");
  TUBEMAE_EXPECT(heads >= 1 && channels % heads == 0, "channels must be divisible by heads");
  TransformerStack s;
  s.heads_ = heads;
  s.channels_ = channels;
  for (int l = 0; l < depth; ++l) {
    TransformerLayer layer;
    layer.norm1 = nn::LayerNorm::init(channels);
    layer.query = nn::Linear::init(channels, channels, rng);
    layer.key = nn::Linear::init(channels, channels, rng);
    layer.value = nn::Linear::init(channels, channels, rng);
    layer.output = nn::Linear::init(channels, channels, rng);
    layer.norm2 = nn::LayerNorm::init(channels);
    layer.mlp = nn::Mlp::init(channels, channels * mlp_ratio, channels, rng);
    s.layers_.push_back(std::move(layer));
  }
  return s;
}

dc::Tensor TransformerStack::forward(const dc::Tensor& x, AttentionCapture* capture) const {
  TUBEMAE_EXPECT(x.rank() == 2 && x.dim(1) == channels_, "transformer input must be [tokens, C]");
  const dc::Index tokens = x.dim(0);
  const dc::Index head_dim = channels_ / heads_;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  if (capture) {
    TUBEMAE_EXPECT(capture->layer >= 0 && capture->layer < depth(),
                   "attention layer " + std::to_string(capture->layer) + " out of range [0, " +
                       std::to_string(depth()) + ")");
    capture->heads = heads_;
    capture->tokens = static_cast<int>(tokens);
    capture->weights.clear();
  }

  dc::Tensor z = x;
  for (int l = 0; l < depth(); ++l) {
    const auto& layer = layers_[static_cast<std::size_t>(l)];
    const dc::Tensor h = layer.norm1(z);
    const dc::Tensor q = layer.query(h);
    const dc::Tensor k = layer.key(h);
    const dc::Tensor v = layer.value(h);
    std::vector<dc::Tensor> head_out;
    head_out.reserve(static_cast<std::size_t>(heads_));
    for (int hd = 0; hd < heads_; ++hd) {
      const dc::Index off = hd * head_dim;
      const dc::Tensor qh = dc::narrow(q, 1, off, head_dim);
      const dc::Tensor kh = dc::narrow(k, 1, off, head_dim);
      const dc::Tensor vh = dc::narrow(v, 1, off, head_dim);
      const dc::Tensor attn = dc::softmax(dc::scale(dc::matmul_nt(qh, kh), inv_sqrt));
      if (capture && capture->layer == l) {
        capture->weights.insert(capture->weights.end(), attn.data().begin(), attn.data().end());
      }
      head_out.push_back(dc::matmul(attn, vh));
    }
    const dc::Tensor f = dc::add(layer.output(heads_ == 1 ? head_out.front() : dc::concat(head_out, 1)), z);
    z = dc::add(layer.mlp(layer.norm2(f)), f);
  }
  return z;
}

void TransformerStack::collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].collect(out, prefix + "layer" + std::to_string(l) + ".");
  }
}

void write_attention_csv(std::ostream& os, const AttentionRecord& record) {
  const auto& c = record.capture;
  TUBEMAE_EXPECT(c.weights.size() == static_cast<std::size_t>(c.heads) * c.tokens * c.tokens,
                 "attention record is incomplete");
  TUBEMAE_EXPECT(record.anchors.size() == static_cast<std::size_t>(c.tokens), "one anchor per token required");
  io::CsvWriter csv(os, {"layer", "head", "query_index", "key_index", "weight", "qx", "qy", "qz", "qt"});
  std::size_t idx = 0;
  for (int h = 0; h < c.heads; ++h) {
    for (int q = 0; q < c.tokens; ++q) {
      const auto& a = record.anchors[static_cast<std::size_t>(q)];
      for (int k = 0; k < c.tokens; ++k) {
        csv.row(c.layer, h, q, k, c.weights[idx++], a[0], a[1], a[2], a[3]);
      }
    }
  }
}

}  // namespace tubemae::backbone
