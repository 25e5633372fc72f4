// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_support.hpp"
#include "tubemae/backbone/decoder.hpp"
#include "tubemae/backbone/encoder.hpp"
#include "tubemae/backbone/transformer.hpp"
#include "tubemae/common/error.hpp"
#include "tubemae/diffcore/gradcheck.hpp"
#include "tubemae/diffcore/ops.hpp"
#include "tubemae/geometry/tubes.hpp"

namespace bb = tubemae::backbone;
namespace dc = tubemae::dc;
using testing_support::random_tensor;
using testing_support::values;

namespace {

void zero_all(std::vector<dc::NamedTensor> params) {
  for (auto& p : params)
    for (auto& v : p.tensor.mutable_data()) v = 0.0;
}

std::vector<std::array<double, 4>> grid_anchors(int rows) {
  std::vector<std::array<double, 4>> a;
  for (int i = 0; i < rows; ++i) a.push_back({0.1 * i, -0.05 * i, 0.02 * i, static_cast<double>(i / 2)});
  return a;
}

}  // namespace

TEST(Transformer, ZeroWeightsGiveTheResidualIdentity) {
  tubemae::Rng rng(1);
  auto stack = bb::TransformerStack::init(3, 8, 2, 2, rng);
  std::vector<dc::NamedTensor> params;
  for (auto& layer : stack.layers()) {
    layer.query.collect(params, "q");
    layer.key.collect(params, "k");
    layer.value.collect(params, "v");
    layer.output.collect(params, "o");
    layer.mlp.collect(params, "m");
  }
  zero_all(params);
  const auto x = random_tensor({5, 8}, 2);
  EXPECT_EQ(values(stack.forward(x)), values(x));
}

TEST(Transformer, PermutingTokensPermutesOutputs) {
  tubemae::Rng rng(3);
  const auto stack = bb::TransformerStack::init(2, 8, 4, 2, rng);
  const auto x = random_tensor({4, 8}, 4);
  const dc::Index order[] = {2, 0, 3, 1};
  const auto a = values(dc::gather_rows(stack.forward(x), order));
  const auto b = values(stack.forward(dc::gather_rows(x, order)));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Transformer, CapturedAttentionRowsAreDistributions) {
  tubemae::Rng rng(5);
  const auto stack = bb::TransformerStack::init(2, 8, 2, 2, rng);
  bb::AttentionCapture cap;
  cap.layer = 1;
  stack.forward(random_tensor({6, 8}, 6), &cap);
  ASSERT_EQ(cap.heads, 2);
  ASSERT_EQ(cap.tokens, 6);
  ASSERT_EQ(cap.weights.size(), 2u * 6 * 6);
  for (int row = 0; row < 12; ++row) {
    double s = 0.0;
    for (int k = 0; k < 6; ++k) {
      EXPECT_GE(cap.weights[row * 6 + k], 0.0);
      s += cap.weights[row * 6 + k];
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Transformer, HeadsMustDivideChannels) {
  tubemae::Rng rng(1);
  EXPECT_THROW(bb::TransformerStack::init(1, 10, 4, 2, rng), tubemae::ContractError);
}

TEST(Transformer, GradientsMatchFiniteDifferences) {
  tubemae::Rng rng(9);
  const auto stack = bb::TransformerStack::init(1, 4, 2, 2, rng);
  auto x = random_tensor({3, 4}, 10, true);
  std::vector<dc::NamedTensor> leaves{{"x", x}};
  stack.collect(leaves, "stack.");
  const auto w = random_tensor({3, 4}, 11);
  auto options = dc::GradCheckOptions{};
  options.magnitude_floor = 1e-5;  // key biases have exactly zero gradient
  const auto report = dc::check_gradients([&] { return dc::sum(dc::mul(stack.forward(x), w)); }, leaves, options);
  EXPECT_TRUE(report.passed(1e-4)) << report.max_rel_error;
}

TEST(AttentionCsv, OneRowPerHeadQueryKey) {
  bb::AttentionRecord rec;
  rec.capture = {1, 2, 2, {0.25, 0.75, 0.5, 0.5, 1.0, 0.0, 0.0, 1.0}};
  rec.anchors = {{0, 0, 0, 0}, {1, 2, 3, 4}};
  std::ostringstream os;
  bb::write_attention_csv(os, rec);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "layer,head,query_index,key_index,weight,qx,qy,qz,qt");
  int rows = 0;
  std::string second;
  while (std::getline(is, line)) {
    if (rows == 1) second = line;
    ++rows;
  }
  EXPECT_EQ(rows, 8);
  EXPECT_EQ(second, "1,0,0,1,0.75,0,0,0,0");
}

TEST(Ema, UpdateIsTheExactConvexCombination) {
  auto shadow = random_tensor({7}, 1, false);
  const auto online = random_tensor({7}, 2, false);
  const auto before = values(shadow);
  std::vector<dc::NamedTensor> s{{"w", shadow}}, o{{"w", online}};
  bb::ema_update(s, o, 0.999);
  for (int i = 0; i < 7; ++i) EXPECT_EQ(shadow.at(i), 0.999 * before[i] + (1.0 - 0.999) * online.at(i));
}

TEST(EncoderPair, MomentumStartsAsAnExactDetachedCopy) {
  tubemae::Rng rng(4);
  bb::EncoderConfig cfg;
  cfg.channels = 8;
  cfg.depth = 2;
  cfg.heads = 2;
  const auto pair = bb::EncoderPair::init(cfg, 0.9, rng);
  std::vector<dc::NamedTensor> on, mo;
  pair.online.collect(on, "");
  pair.momentum.collect(mo, "");
  ASSERT_EQ(on.size(), mo.size());
  for (std::size_t i = 0; i < on.size(); ++i) {
    EXPECT_EQ(on[i].name, mo[i].name);
    EXPECT_EQ(values(on[i].tensor), values(mo[i].tensor));
    EXPECT_NE(on[i].tensor.node(), mo[i].tensor.node());
    EXPECT_TRUE(on[i].tensor.requires_grad());
    EXPECT_FALSE(mo[i].tensor.requires_grad());
  }
}

TEST(EncoderPair, MomentumPathEmitsNoGradient) {
  tubemae::Rng rng(4);
  bb::EncoderConfig cfg;
  cfg.channels = 8;
  cfg.depth = 1;
  cfg.heads = 2;
  const auto pair = bb::EncoderPair::init(cfg, 0.9, rng);
  const auto video = testing_support::random_video(4, 16, 3);
  tubemae::geometry::TubeConfig tc;
  tc.spatial_stride = 8;
  tc.neighbors = 4;
  const auto tubes = tubemae::geometry::build_tubes(video, tc, 1);
  const auto z = pair.encode_momentum(pair.embed_momentum(tubes));
  EXPECT_FALSE(z.requires_grad());
  const auto zv = pair.encode_online(pair.online.embed(tubes));
  dc::backward(dc::sum(dc::mul(zv, z)));
  std::vector<dc::NamedTensor> mo;
  pair.momentum.collect(mo, "");
  for (const auto& p : mo) EXPECT_FALSE(p.tensor.has_grad()) << p.name;
}

TEST(Encoder, CopyIsIndependent) {
  tubemae::Rng rng(4);
  bb::EncoderConfig cfg;
  cfg.channels = 8;
  cfg.depth = 1;
  cfg.heads = 2;
  const auto e = bb::Encoder::init(cfg, rng);
  auto c = e.copy(true);
  c.p4d.displacement_weight.mutable_data()[0] += 1.0;
  c.stack.layers()[0].query.weight.mutable_data()[0] += 1.0;
  EXPECT_NE(c.p4d.displacement_weight.at(0), e.p4d.displacement_weight.at(0));
  EXPECT_NE(c.stack.layers()[0].query.weight.at(0), e.stack.layers()[0].query.weight.at(0));
}

TEST(Decoder, BothPassesShareTheStack) {
  tubemae::Rng rng(6);
  bb::DecoderConfig cfg;
  cfg.depth = 1;
  cfg.heads = 2;
  cfg.mlp_ratio = 2;
  auto dec = bb::Decoder::init(8, 6, cfg, rng);
  const auto zv = random_tensor({3, 8}, 7);
  const auto anchors = grid_anchors(6);
  const std::vector<std::array<double, 4>> masked(anchors.begin(), anchors.begin() + 3);
  const auto geo0 = values(dec.decode_geometry(zv, masked, 3));
  const auto lat0 = values(dec.decode_latent(zv, anchors, 3));
  dec.stack.layers()[0].mlp.fc2.weight.mutable_data()[0] += 0.5;
  EXPECT_NE(values(dec.decode_geometry(zv, masked, 3)), geo0);
  EXPECT_NE(values(dec.decode_latent(zv, anchors, 3)), lat0);
}

TEST(Decoder, LatentPassRowsFollowTheGrid) {
  tubemae::Rng rng(6);
  bb::DecoderConfig cfg;
  cfg.depth = 1;
  cfg.heads = 2;
  auto dec = bb::Decoder::init(8, 6, cfg, rng);
  const auto zv = random_tensor({2, 8}, 7);
  EXPECT_EQ(dec.decode_latent(zv, grid_anchors(6), 3).shape(), (dc::Shape{6, 8}));
  EXPECT_EQ(dec.decode_geometry(zv, grid_anchors(4), 3).shape(), (dc::Shape{4, 8}));
  EXPECT_THROW(dec.decode_latent(zv, grid_anchors(5), 3), tubemae::ContractError);

  cfg.latent_tokens = false;
  auto plain = bb::Decoder::init(8, 6, cfg, rng);
  EXPECT_FALSE(plain.latent_tokens.defined());
  EXPECT_EQ(values(plain.decode_latent(zv, grid_anchors(6), 3)), values(plain.decode_geometry(zv, grid_anchors(6), 3)));
}

TEST(PredictionHead, ZeroWeightsPlaceEveryPointOnItsAnchor) {
  tubemae::Rng rng(2);
  auto head = bb::PredictionHead::init(8, 3, 2, rng);
  zero_all({{"w", head.linear.weight}, {"b", head.linear.bias}});
  const auto anchors = grid_anchors(2);
  const auto p = values(bb::predict_points(random_tensor({2, 8}, 3), head, anchors));
  ASSERT_EQ(p.size(), 2u * 3 * 2 * 3);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t j = 0; j < 18; ++j) EXPECT_EQ(p[r * 18 + j], anchors[r][j % 3]);
}
