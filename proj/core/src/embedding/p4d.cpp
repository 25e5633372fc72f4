// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/embedding/p4d.hpp"

#include <algorithm>
#include <cmath>

#include "tubemae/common/error.hpp"
#include "tubemae/diffcore/ops.hpp"
#include "tubemae/nn/init.hpp"

namespace tubemae::embedding {

Aggregation parse_aggregation(const std::string& name) {
  if (name == "literal-sum") return Aggregation::kLiteralSum;
  if (name == "mlp-max") return Aggregation::kMlpMax;
  throw ConfigError("unknown P4D aggregation '" + name + "' (expected literal-sum or mlp-max)");
}

std::string to_string(Aggregation a) { return a == Aggregation::kLiteralSum ? "literal-sum" : "mlp-max"; }

P4DKernel P4DKernel::init(int channels, int feature_channels, Aggregation aggregation, bool with_bias, Rng& rng) {
  TUBEMAE_EXPECT(channels >= 1 && feature_channels >= 0, "P4DKernel: bad channel counts");
  P4DKernel k;
  k.aggregation = aggregation;
  k.displacement_weight = nn::xavier_uniform(4, channels, rng);
  if (feature_channels > 0) k.feature_weight = nn::xavier_uniform(feature_channels, channels, rng);
  if (with_bias) k.bias = dc::Tensor::zeros({channels}, true);
  return k;
}

void P4DKernel::collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const {
  out.push_back({prefix + "displacement_weight", displacement_weight});
  if (feature_weight.defined()) out.push_back({prefix + "feature_weight", feature_weight});
  if (bias.defined()) out.push_back({prefix + "bias", bias});
}

PositionalMap PositionalMap::init(int channels, Rng& rng) {
  return PositionalMap{nn::xavier_uniform(4, channels, rng), dc::Tensor::zeros({channels}, true)};
}

void PositionalMap::collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const {
  out.push_back({prefix + "weight", weight});
  out.push_back({prefix + "bias", bias});
}

std::array<double, 4> normalized_displacement(const geometry::TubeBatch& tubes, std::size_t member) {
  const auto& d = tubes.displacements[member];
  const int half = (tubes.tube_frames - 1) / 2;
  return {d[0] / tubes.radius, d[1] / tubes.radius, d[2] / tubes.radius, half > 0 ? d[3] / half : 0.0};
}

dc::Tensor normalized_anchors(const std::vector<std::array<double, 4>>& anchors, int source_frames) {
  TUBEMAE_EXPECT(!anchors.empty(), "normalized_anchors: no anchors");
  const double t_scale = 1.0 / std::max(1, source_frames - 1);
  std::vector<double> values;
  values.reserve(anchors.size() * 4);
  for (const auto& a : anchors) {
    values.insert(values.end(), {a[0], a[1], a[2], a[3] * t_scale});
  }
  return dc::Tensor::from({static_cast<dc::Index>(anchors.size()), 4}, std::move(values));
}

EmbeddingBatch p4d_embed(const geometry::TubeBatch& tubes, const P4DKernel& kernel) {
  const int rows = tubes.anchor_count();
  const int per_anchor = tubes.members_per_anchor();
  const int cin = tubes.feature_channels;
  TUBEMAE_EXPECT(rows > 0, "p4d_embed: empty tube batch");
  TUBEMAE_EXPECT(kernel.displacement_weight.rank() == 2 && kernel.displacement_weight.dim(0) == 4,
                 "p4d_embed: displacement weight must be [4, C]");
  TUBEMAE_EXPECT((cin > 0) == kernel.feature_weight.defined(),
                 "p4d_embed: feature weight must be present iff the tubes carry features");
  if (cin > 0) {
    TUBEMAE_EXPECT(kernel.feature_weight.dim(0) == cin, "p4d_embed: feature weight rows != feature channels");
  }
  const dc::Index c = kernel.channels();

  EmbeddingBatch out;
  out.anchor_frames = tubes.anchor_frames;
  out.anchors_per_frame = tubes.anchors_per_frame;
  out.anchors = tubes.anchors;
  out.source_frames = tubes.source_frames;

  if (kernel.aggregation == Aggregation::kLiteralSum) {
    // The sum is linear, so aggregating inputs first gives the same result as
    // transforming every member and summing.
    std::vector<double> dsum(static_cast<std::size_t>(rows) * 4, 0.0);
    std::vector<double> fsum(static_cast<std::size_t>(rows) * cin, 0.0);
    for (int a = 0; a < rows; ++a) {
      for (int m = 0; m < per_anchor; ++m) {
        const std::size_t idx = static_cast<std::size_t>(a) * per_anchor + m;
        const auto d = normalized_displacement(tubes, idx);
        for (int q = 0; q < 4; ++q) dsum[static_cast<std::size_t>(a) * 4 + q] += d[static_cast<std::size_t>(q)];
        for (int q = 0; q < cin; ++q) {
          fsum[static_cast<std::size_t>(a) * cin + q] += tubes.member_features[idx * cin + q];
        }
      }
    }
    dc::Tensor e = dc::matmul(dc::Tensor::from({rows, 4}, std::move(dsum)), kernel.displacement_weight);
    if (cin > 0) e = dc::add(e, dc::matmul(dc::Tensor::from({rows, cin}, std::move(fsum)), kernel.feature_weight));
    if (kernel.bias.defined()) e = dc::add(e, dc::repeat_rows(kernel.bias, rows));
    out.embeddings = e;
    return out;
  }

  const dc::Index total = static_cast<dc::Index>(rows) * per_anchor;
  std::vector<double> dall(static_cast<std::size_t>(total) * 4);
  for (dc::Index i = 0; i < total; ++i) {
    const auto d = normalized_displacement(tubes, static_cast<std::size_t>(i));
    std::copy(d.begin(), d.end(), dall.begin() + i * 4);
  }
  dc::Tensor h = dc::matmul(dc::Tensor::from({total, 4}, std::move(dall)), kernel.displacement_weight);
  if (cin > 0) {
    dc::Tensor f = dc::Tensor::from({total, cin}, tubes.member_features);
    h = dc::add(h, dc::matmul(f, kernel.feature_weight));
  }
  if (kernel.bias.defined()) h = dc::add(h, dc::repeat_rows(kernel.bias, total));
  h = dc::relu(h);
  out.embeddings = dc::max_axis(dc::reshape(h, {rows, per_anchor, c}), 1);
  return out;
}

EmbeddingBatch positional_encode(const EmbeddingBatch& batch, const PositionalMap& map) {
  EmbeddingBatch out = batch;
  const dc::Tensor pos = dc::linear(normalized_anchors(batch.anchors, batch.source_frames), map.weight, map.bias);
  out.embeddings = dc::add(batch.embeddings, pos);
  return out;
}

}  // namespace tubemae::embedding
