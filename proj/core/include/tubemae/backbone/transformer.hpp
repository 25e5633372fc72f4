// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "tubemae/common/rng.hpp"
#include "tubemae/diffcore/gradcheck.hpp"
#include "tubemae/diffcore/tensor.hpp"
#include "tubemae/nn/layers.hpp"

namespace tubemae::backbone {

/// Pre-norm block: f = MSA(LN(z)) + z; z' = MLP(LN(f)) + f.
struct TransformerLayer {
  nn::LayerNorm norm1;
  nn::Linear query;
  nn::Linear key;
  nn::Linear value;
  nn::Linear output;
  nn::LayerNorm norm2;
  nn::Mlp mlp;

  void collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const;
};

/// Softmaxed attention weights of one layer, filled during a forward pass.
struct AttentionCapture {
  int layer = 0;
  int heads = 0;
  int tokens = 0;
  std::vector<double> weights;  // heads x tokens x tokens, row = query
};

class TransformerStack {
 public:
  TransformerStack() = default;
  static TransformerStack init(int depth, int channels, int heads, int mlp_ratio, Rng& rng);

  /// x is [tokens, C]; attention is dense over all tokens.
  dc::Tensor forward(const dc::Tensor& x, AttentionCapture* capture = nullptr) const;

  int depth() const { return static_cast<int>(layers_.size()); }
  int heads() const { return heads_; }
  int channels() const { return channels_; }
  std::vector<TransformerLayer>& layers() { return layers_; }
  const std::vector<TransformerLayer>& layers() const { return layers_; }

  void collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const;

 private:
  std::vector<TransformerLayer> layers_;
  int heads_ = 1;
  int channels_ = 0;
};

/// Attention weights of one layer together with the query anchor coordinates.
struct AttentionRecord {
  AttentionCapture capture;
  std::vector<std::array<double, 4>> anchors;  // per token
};

/// CSV columns: layer,head,query_index,key_index,weight,qx,qy,qz,qt.
void write_attention_csv(std::ostream& os, const AttentionRecord& record);

}  // namespace tubemae::backbone
