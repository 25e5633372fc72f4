// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "test_support.hpp"
#include "tubemae/common/error.hpp"
#include "tubemae/diffcore/ops.hpp"
#include "tubemae/io/binary.hpp"
#include "tubemae/pipeline/checkpoint.hpp"
#include "tubemae/pipeline/optim.hpp"
#include "tubemae/pipeline/train.hpp"

namespace pl = tubemae::pipeline;
namespace dc = tubemae::dc;
using testing_support::random_video;
using testing_support::tiny_model_config;
using testing_support::values;

namespace {

struct TinyBatch {
  std::vector<tubemae::geometry::TubeBatch> tubes;
  std::vector<tubemae::masking::MaskPlan> plans;
};

TinyBatch tiny_batch(const pl::ModelConfig& cfg, int videos, std::uint64_t seed) {
  TinyBatch b;
  for (int i = 0; i < videos; ++i) {
    const auto v = random_video(cfg.source_frames, cfg.points, seed * 100 + i);
    b.tubes.push_back(tubemae::geometry::build_tubes(v, cfg.tubes, seed + i));
    b.plans.push_back(tubemae::masking::make_mask(b.tubes.back().anchor_frames, b.tubes.back().anchors_per_frame,
                                                  tubemae::masking::MaskStrategy::kFrame, 0.5, seed * 7 + i));
  }
  return b;
}

pl::PretrainConfig tiny_pretrain() {
  pl::PretrainConfig p;
  p.mask.ratio = 0.5;
  p.loss.queue_size = 8;
  return p;
}

std::vector<double> flatten(const std::vector<dc::NamedTensor>& params) {
  std::vector<double> out;
  for (const auto& p : params) out.insert(out.end(), p.tensor.data().begin(), p.tensor.data().end());
  return out;
}

}  // namespace

TEST(Schedule, WarmupThenHalfCosine) {
  const pl::Schedule s{2.0, 10, 110};
  EXPECT_EQ(pl::lr_at(0, s), 0.0);
  EXPECT_DOUBLE_EQ(pl::lr_at(5, s), 1.0);
  EXPECT_DOUBLE_EQ(pl::lr_at(10, s), 2.0);
  EXPECT_NEAR(pl::lr_at(60, s), 1.0, 1e-15);
  EXPECT_NEAR(pl::lr_at(109, s), 2.0 * 0.5 * (1 + std::cos(M_PI * 99.0 / 100.0)), 1e-15);
  EXPECT_EQ(pl::lr_at(110, s), 0.0);
  for (std::int64_t t = 10; t < 110; ++t) EXPECT_LE(pl::lr_at(t + 1, s), pl::lr_at(t, s));
}

TEST(Optimizer, ZeroGradientLeavesOnlyDecoupledDecay) {
  for (auto kind : {pl::OptimizerKind::kAdamW, pl::OptimizerKind::kSgd}) {
    auto w = dc::Tensor::from({3}, {1.0, -2.0, 0.5}, true);
    pl::OptimizerConfig cfg;
    cfg.kind = kind;
    cfg.weight_decay = 0.1;
    pl::Optimizer opt({{"w", w}}, cfg);
    opt.step(0.5);
    EXPECT_EQ(values(w), (std::vector<double>{1.0 * 0.95, -2.0 * 0.95, 0.5 * 0.95})) << pl::to_string(kind);
  }
}

TEST(Optimizer, FirstAdamWStepMovesBySignOfGradient) {
  auto w = dc::Tensor::from({2}, {0.0, 0.0}, true);
  pl::OptimizerConfig cfg;
  cfg.weight_decay = 0.0;
  pl::Optimizer opt({{"w", w}}, cfg);
  dc::backward(dc::sum(dc::mul(w, dc::Tensor::from({2}, {3.0, -0.01}))));
  opt.step(0.1);
  EXPECT_NEAR(w.at(0), -0.1, 1e-8);
  EXPECT_NEAR(w.at(1), 0.1, 1e-5);
}

TEST(Optimizer, SgdMomentumAccumulatesVelocity) {
  auto w = dc::Tensor::from({1}, {0.0}, true);
  pl::OptimizerConfig cfg;
  cfg.kind = pl::OptimizerKind::kSgd;
  cfg.weight_decay = 0.0;
  cfg.momentum = 0.5;
  pl::Optimizer opt({{"w", w}}, cfg);
  for (int i = 0; i < 2; ++i) {
    opt.zero_grad();
    dc::backward(dc::scale(w, 1.0));  // gradient 1
    opt.step(1.0);
  }
  EXPECT_DOUBLE_EQ(w.at(0), -1.0 - 1.5);
}

TEST(Checkpoint, BytesRoundTripExactly) {
  pl::Checkpoint c;
  c.config_hash = 0x0123456789abcdefULL;
  c.step = 42;
  c.tensors.push_back({"a", {2, 2}, {1.0, -0.0, 1e-300, std::nextafter(1.0, 2.0)}});
  c.tensors.push_back({"b.c", {1}, {3.5}});
  const auto bytes = pl::encode_checkpoint(c);
  EXPECT_EQ(bytes.substr(0, 4), "U4DC");
  EXPECT_EQ(pl::decode_checkpoint(bytes), c);
  EXPECT_THROW(pl::decode_checkpoint(bytes.substr(0, bytes.size() - 1)), tubemae::FormatError);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(pl::decode_checkpoint(bad), tubemae::FormatError);
  EXPECT_THROW(pl::decode_checkpoint(bytes + "x"), tubemae::FormatError);
}

TEST(Checkpoint, ModelOptimizerAndQueueRestoreBitExactly) {
  const auto cfg = tiny_model_config();
  auto model = pl::Model::init(cfg, 3);
  pl::Optimizer opt(model.trainable(), {});
  tubemae::objectives::NegativeQueue queue(8, static_cast<std::size_t>(cfg.encoder.channels));
  const auto batch = tiny_batch(cfg, 2, 1);
  for (int s = 0; s < 3; ++s) pl::pretrain_step(model, opt, queue, batch.tubes, batch.plans, tiny_pretrain(), 1e-3);

  const auto ckpt = pl::decode_checkpoint(pl::encode_checkpoint(pl::capture(model, &opt, &queue, 3, 77)));
  auto fresh = pl::Model::init(cfg, 99);
  pl::Optimizer fresh_opt(fresh.trainable(), {});
  tubemae::objectives::NegativeQueue fresh_queue(8, static_cast<std::size_t>(cfg.encoder.channels));
  pl::restore(ckpt, fresh, &fresh_opt, &fresh_queue);

  EXPECT_EQ(flatten(fresh.all()), flatten(model.all()));
  EXPECT_EQ(fresh_opt.first_moments(), opt.first_moments());
  EXPECT_EQ(fresh_opt.second_moments(), opt.second_moments());
  EXPECT_EQ(fresh_opt.steps(), opt.steps());
  EXPECT_EQ(fresh_queue.entries(), queue.entries());
  EXPECT_EQ(fresh_queue.cursor(), queue.cursor());

  // Continuing from the restored state matches continuing the original.
  pl::pretrain_step(model, opt, queue, batch.tubes, batch.plans, tiny_pretrain(), 1e-3);
  pl::pretrain_step(fresh, fresh_opt, fresh_queue, batch.tubes, batch.plans, tiny_pretrain(), 1e-3);
  EXPECT_EQ(flatten(fresh.all()), flatten(model.all()));
}

TEST(Checkpoint, RestoreRejectsShapeMismatch) {
  auto cfg = tiny_model_config();
  const auto model = pl::Model::init(cfg, 3);
  const auto ckpt = pl::capture(model, nullptr, nullptr, 0, 0);
  cfg.encoder.channels = 8;
  auto other = pl::Model::init(cfg, 3);
  EXPECT_THROW(pl::restore(ckpt, other, nullptr, nullptr), tubemae::FormatError);
}

TEST(PretrainStep, PhasesRunInOrderWithPostStepEmaAndCurrentKeys) {
  const auto cfg = tiny_model_config();
  auto model = pl::Model::init(cfg, 5);
  model.encoders.momentum_coeff = 0.9;
  pl::Optimizer opt(model.trainable(), {});
  tubemae::objectives::NegativeQueue queue(8, static_cast<std::size_t>(cfg.encoder.channels));
  const auto batch = tiny_batch(cfg, 2, 2);

  std::vector<pl::StepPhase> phases;
  std::vector<double> momentum_before = flatten(model.momentum_encoder());
  std::vector<double> online_after_step;
  const auto trace = pl::pretrain_step(model, opt, queue, batch.tubes, batch.plans, tiny_pretrain(), 1e-3,
                                       [&](pl::StepPhase p) {
                                         phases.push_back(p);
                                         if (p == pl::StepPhase::kOptimizer) online_after_step = flatten(model.online_encoder());
                                         if (p == pl::StepPhase::kEma) {
                                           const auto mom = flatten(model.momentum_encoder());
                                           for (std::size_t i = 0; i < mom.size(); ++i)
                                             ASSERT_EQ(mom[i], 0.9 * momentum_before[i] + (1.0 - 0.9) * online_after_step[i]);
                                         }
                                       });
  using P = pl::StepPhase;
  EXPECT_EQ(phases, (std::vector<P>{P::kForward, P::kBackward, P::kForward, P::kBackward, P::kOptimizer, P::kEma,
                                    P::kQueue}));
  ASSERT_EQ(trace.pushed.size(), 2u);
  EXPECT_EQ(queue.entries(), trace.pushed);
  // The pushed keys are this iteration's momentum features, computed before the EMA update.
  tubemae::objectives::NegativeQueue empty(8, static_cast<std::size_t>(cfg.encoder.channels));
  auto reference = pl::Model::init(cfg, 5);
  const auto pass = pl::pretrain_forward(reference, batch.tubes[0], batch.plans[0], empty, tiny_pretrain());
  EXPECT_EQ(values(pass.q), trace.pushed[0]);
}

TEST(PretrainStep, MomentumParametersNeverReceiveGradients) {
  const auto cfg = tiny_model_config();
  auto model = pl::Model::init(cfg, 5);
  pl::Optimizer opt(model.trainable(), {});
  tubemae::objectives::NegativeQueue queue(8, static_cast<std::size_t>(cfg.encoder.channels));
  const auto batch = tiny_batch(cfg, 2, 3);
  for (int s = 0; s < 2; ++s) {
    pl::pretrain_step(model, opt, queue, batch.tubes, batch.plans, tiny_pretrain(), 1e-3, [&](pl::StepPhase p) {
      if (p != pl::StepPhase::kBackward) return;
      for (const auto& m : model.momentum_encoder()) {
        if (!m.tensor.has_grad()) continue;
        for (double g : m.tensor.grad()) ASSERT_EQ(g, 0.0) << m.name;
      }
      EXPECT_FALSE(queue.size() > 0 && queue.as_tensor().requires_grad());
    });
  }
}

TEST(PretrainStep, EmaTracksTheClosedFormOverSeveralSteps) {
  const auto cfg = tiny_model_config();
  auto model = pl::Model::init(cfg, 8);
  const double m = model.encoders.momentum_coeff;
  pl::Optimizer opt(model.trainable(), {});
  tubemae::objectives::NegativeQueue queue(8, static_cast<std::size_t>(cfg.encoder.channels));
  const auto batch = tiny_batch(cfg, 1, 4);
  auto expected = flatten(model.momentum_encoder());
  for (int s = 0; s < 10; ++s) {
    pl::pretrain_step(model, opt, queue, batch.tubes, batch.plans, tiny_pretrain(), 1e-2);
    const auto online = flatten(model.online_encoder());
    for (std::size_t i = 0; i < expected.size(); ++i) expected[i] = m * expected[i] + (1.0 - m) * online[i];
  }
  const auto got = flatten(model.momentum_encoder());
  for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], expected[i], 1e-12);
}

TEST(PretrainStep, GeoOnlyTotalEqualsGeo) {
  const auto cfg = tiny_model_config();
  const auto model = pl::Model::init(cfg, 5);
  tubemae::objectives::NegativeQueue queue(8, static_cast<std::size_t>(cfg.encoder.channels));
  const auto batch = tiny_batch(cfg, 1, 5);
  auto p = tiny_pretrain();
  p.flags = tubemae::objectives::LossFlags::preset("B1");
  const auto pass = pl::pretrain_forward(model, batch.tubes[0], batch.plans[0], queue, p);
  EXPECT_EQ(pass.combined.report.total, pass.combined.report.geo);
  EXPECT_FALSE(pass.terms.lat.defined());
}

TEST(Pretrainer, RunsAreBitReproducible) {
  auto run = [] {
    const auto cfg = tiny_model_config();
    auto model = pl::Model::init(cfg, 1);
    std::vector<tubemae::geometry::PointCloudVideo> videos;
    for (int i = 0; i < 3; ++i) videos.push_back(random_video(cfg.source_frames, cfg.points, 50 + i));
    pl::TrainConfig tc;
    tc.epochs = 2;
    tc.batch_size = 2;
    tc.warmup_epochs = 1;
    tc.seed = 9;
    std::vector<double> out;
    for (const auto& r : pl::pretrain(model, videos, tiny_pretrain(), tc)) out.push_back(r.loss.total);
    const auto params = flatten(model.all());
    out.insert(out.end(), params.begin(), params.end());
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(LinearProbe, LeavesTheEncoderUntouched) {
  const auto cfg = tiny_model_config();
  const auto model = pl::Model::init(cfg, 2);
  std::vector<tubemae::geometry::PointCloudVideo> train, test;
  for (int i = 0; i < 6; ++i) {
    auto v = random_video(cfg.source_frames, cfg.points, 70 + i);
    v.label = i % 2;
    (i < 4 ? train : test).push_back(v);
  }
  const auto before = tubemae::fnv1a64(pl::encode_checkpoint(pl::capture(model, nullptr, nullptr, 0, 0)));
  pl::ProbeConfig pc;
  pc.epochs = 20;
  const auto r = pl::linear_probe(model.encoders.online, cfg.tubes, train, test, pc);
  EXPECT_EQ(tubemae::fnv1a64(pl::encode_checkpoint(pl::capture(model, nullptr, nullptr, 0, 0))), before);
  EXPECT_EQ(r.test_predictions.size(), 2u);
}

TEST(LinearClassifier, SeparatesLinearlySeparableClasses) {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  tubemae::Rng rng(3);
  for (int i = 0; i < 60; ++i) {
    const int c = i % 3;
    x.push_back({c == 0 ? 5.0 : 0.0, c == 1 ? 5.0 : 0.0, rng.normal()});
    y.push_back(c);
  }
  const auto r = pl::fit_linear_classifier(x, y, x, y, 3, {});
  EXPECT_EQ(r.train_accuracy, 100.0);
  EXPECT_EQ(r.test_accuracy, 100.0);
}

TEST(FewShotSplit, ExactCountsAndDisjointSplits) {
  std::vector<int> labels;
  for (int c = 0; c < 12; ++c)
    for (int k = 0; k < 8; ++k) labels.push_back(c);
  for (auto [n, m] : {std::pair{5, 1}, std::pair{10, 5}}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto s = pl::fewshot_split(labels, n, m, seed);
      ASSERT_EQ(s.classes.size(), static_cast<std::size_t>(n));
      ASSERT_EQ(s.train.size(), static_cast<std::size_t>(n * m));
      std::set<std::size_t> tr(s.train.begin(), s.train.end());
      for (auto e : s.eval) ASSERT_FALSE(tr.count(e));
      for (auto i : s.train) ASSERT_TRUE(std::binary_search(s.classes.begin(), s.classes.end(), labels[i]));
      ASSERT_EQ(s.eval.size(), static_cast<std::size_t>(n * (8 - m)));
    }
  }
  EXPECT_THROW(pl::fewshot_split(labels, 13, 1, 0), tubemae::ContractError);
  EXPECT_THROW(pl::fewshot_split(labels, 2, 8, 0), tubemae::ContractError);
}

TEST(StratifiedFraction, KeepsRoundedShareOfEveryClass) {
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < 16; ++k) labels.push_back(c);
  const auto half = pl::stratified_fraction(labels, 0.5, 4);
  std::vector<int> per(3, 0);
  for (auto i : half) ++per[labels[i]];
  EXPECT_EQ(per, (std::vector<int>{8, 8, 8}));
  EXPECT_EQ(half, pl::stratified_fraction(labels, 0.5, 4));
  EXPECT_EQ(pl::stratified_fraction(labels, 1.0, 4).size(), 48u);
  EXPECT_EQ(pl::stratified_fraction(labels, 0.01, 4).size(), 3u);  // at least one per class
}

TEST(Segmentation, AnchorFrameLabelsSampleAtTheTemporalStride) {
  tubemae::geometry::PointCloudVideo v = random_video(6, 4, 1);
  v.frame_labels = {0, 0, 1, 1, 2, 2};
  tubemae::geometry::TubeConfig tc;
  tc.temporal_stride = 2;
  EXPECT_EQ(pl::anchor_frame_labels(v, tc), (std::vector<int>{0, 1, 2}));
}
