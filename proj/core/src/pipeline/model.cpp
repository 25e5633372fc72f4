// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/pipeline/model.hpp"

#include <cmath>
#include <sstream>

#include "tubemae/common/error.hpp"
#include "tubemae/diffcore/ops.hpp"

namespace tubemae::pipeline {

void ModelConfig::validate() const {
  tubes.validate();
  TUBEMAE_EXPECT(source_frames >= 1 && points >= 1, "model: L and N must be positive");
  TUBEMAE_EXPECT(source_frames % tubes.temporal_stride == 0, "model: temporal stride must divide L");
  TUBEMAE_EXPECT(points % tubes.spatial_stride == 0, "model: spatial stride must divide N");
  TUBEMAE_EXPECT(encoder.channels % encoder.heads == 0 && encoder.channels % decoder.heads == 0,
                 "model: heads must divide channels");
  TUBEMAE_EXPECT(momentum >= 0.0 && momentum <= 1.0, "model: momentum must lie in [0, 1]");
}

Model Model::init(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = Rng::stream(seed, "init");
  Model m;
  m.config = cfg;
  m.encoders = backbone::EncoderPair::init(cfg.encoder, cfg.momentum, rng);
  m.decoder = backbone::Decoder::init(cfg.encoder.channels, cfg.anchor_frames() * cfg.anchors_per_frame(), cfg.decoder, rng);
  m.head = backbone::PredictionHead::init(cfg.encoder.channels, cfg.tubes.tube_frames, cfg.tubes.neighbors, rng);
  m.heads = objectives::ProjectionHeads::init(cfg.encoder.channels, rng);
  return m;
}

std::vector<dc::NamedTensor> Model::online_encoder() const {
  std::vector<dc::NamedTensor> out;
  encoders.online.collect(out, "online.");
  return out;
}

std::vector<dc::NamedTensor> Model::momentum_encoder() const {
  std::vector<dc::NamedTensor> out;
  encoders.momentum.collect(out, "momentum.");
  return out;
}

std::vector<dc::NamedTensor> Model::trainable() const {
  std::vector<dc::NamedTensor> out = online_encoder();
  decoder.collect(out, "decoder.");
  head.collect(out, "head.");
  heads.collect(out, "heads.");
  return out;
}

std::vector<dc::NamedTensor> Model::all() const {
  auto out = trainable();
  for (auto& t : momentum_encoder()) out.push_back(std::move(t));
  return out;
}

VideoPass pretrain_forward(const Model& model, const geometry::TubeBatch& tubes, const masking::MaskPlan& plan,
                           const objectives::NegativeQueue& queue, const PretrainConfig& cfg,
                           const PassOptions& options) {
  VideoPass pass;
  pass.plan = plan;
  const auto full = model.encoders.online.embed(tubes);
  pass.split = masking::split_embeddings(full, plan, tubes);
  pass.z_visible = model.encoders.encode_online(pass.split.visible);
  pass.z_momentum = model.encoders.encode_momentum(model.encoders.embed_momentum(tubes));
  const int source_frames = tubes.source_frames;
  const int anchor_frames = tubes.anchor_frames;

  if (cfg.flags.geo || options.force_geometry) {
    pass.z_geo = model.decoder.decode_geometry(pass.z_visible, pass.split.masked_anchors, source_frames);
    if (cfg.flags.geo) {
      const dc::Tensor rec = backbone::predict_points(pass.z_geo, model.head, pass.split.masked_anchors);
      const dc::Tensor gt = dc::Tensor::from({rec.dim(0), static_cast<dc::Index>(tubes.members_per_anchor()) * 3},
                                             pass.split.masked_ground_truth);
      pass.terms.geo = objectives::chamfer_loss(rec, gt, tubes.tube_frames);
    }
  }
  if (cfg.flags.lat || options.force_latent) {
    pass.z_lat = model.decoder.decode_latent(pass.z_visible, full.anchors, source_frames);
    if (cfg.flags.lat) pass.terms.lat = objectives::latent_loss(pass.z_lat, pass.z_momentum, model.heads);
  }
  if (cfg.flags.motion) {
    const auto online = objectives::pool_frames(pass.z_visible, pass.split.visible_frame, anchor_frames);
    const auto target = objectives::pool_frames(pass.z_momentum, anchor_frames);
    pass.terms.motion = objectives::motion_loss(online, target, model.heads, cfg.loss);
  }
  pass.q = objectives::pool_global(pass.z_momentum);
  if (cfg.flags.global) {
    const dc::Tensor q_hat = objectives::pool_global(pass.z_visible);
    pass.terms.global = objectives::global_loss(q_hat, pass.q, queue, model.heads, cfg.loss);
  }
  pass.combined = objectives::total_loss(pass.terms);
  return pass;
}

StepTrace pretrain_step(Model& model, Optimizer& optimizer, objectives::NegativeQueue& queue,
                        const std::vector<geometry::TubeBatch>& tubes, const std::vector<masking::MaskPlan>& plans,
                        const PretrainConfig& cfg, double lr, const StepHook& hook) {
  TUBEMAE_EXPECT(!tubes.empty() && tubes.size() == plans.size(), "pretrain_step: one mask plan per video");
  TUBEMAE_EXPECT(cfg.flags.any(), "pretrain_step: every loss is disabled");
  const auto notify = [&](StepPhase phase) {
    if (hook) hook(phase);
  };
  optimizer.zero_grad();
  const double weight = 1.0 / static_cast<double>(tubes.size());
  StepTrace trace;
  std::vector<dc::Tensor> keys;
  for (std::size_t i = 0; i < tubes.size(); ++i) {
    VideoPass pass;
    try {
      pass = pretrain_forward(model, tubes[i], plans[i], queue, cfg);
    } catch (const NumericError& e) {
      std::ostringstream msg;
      msg << "non-finite value in pre-training forward pass (optimizer step " << optimizer.steps() << ", batch item "
          << i << ", mask seed " << plans[i].seed << "): " << e.what();
      throw NumericError(msg.str());
    }
    const auto& r = pass.combined.report;
    if (!std::isfinite(r.total)) {
      std::ostringstream msg;
      msg << "non-finite loss at optimizer step " << optimizer.steps() << ", batch item " << i << ": geo=" << r.geo
          << " lat=" << r.lat << " motion=" << r.motion << " global=" << r.global;
      throw NumericError(msg.str());
    }
    notify(StepPhase::kForward);
    if (pass.combined.total.requires_grad()) dc::backward(dc::scale(pass.combined.total, weight));
    notify(StepPhase::kBackward);
    trace.report.geo += weight * r.geo;
    trace.report.lat += weight * r.lat;
    trace.report.motion += weight * r.motion;
    trace.report.global += weight * r.global;
    trace.report.total += weight * r.total;
    keys.push_back(pass.q);
  }
  optimizer.step(lr);
  notify(StepPhase::kOptimizer);
  model.encoders.ema_update();
  notify(StepPhase::kEma);
  for (const auto& q : keys) {
    queue.push(q.data());
    trace.pushed.emplace_back(q.data().begin(), q.data().end());
  }
  notify(StepPhase::kQueue);
  return trace;
}

std::vector<double> encode_video(const backbone::Encoder& encoder, const geometry::TubeBatch& tubes) {
  dc::NoGradGuard guard;
  const auto batch = encoder.embed(tubes);
  const dc::Tensor pooled = dc::max_axis(encoder.encode(batch.embeddings), 0);
  return {pooled.data().begin(), pooled.data().end()};
}

double measure_disentanglement(const Model& model, const std::vector<geometry::TubeBatch>& tubes,
                               const std::vector<masking::MaskPlan>& plans, const PretrainConfig& cfg) {
  TUBEMAE_EXPECT(!tubes.empty() && tubes.size() == plans.size(), "measure_disentanglement: one plan per video");
  dc::NoGradGuard guard;
  PretrainConfig probe = cfg;
  probe.flags = {false, false, false, false};
  const objectives::NegativeQueue empty(0, static_cast<std::size_t>(model.config.encoder.channels));
  double acc = 0.0;
  for (std::size_t i = 0; i < tubes.size(); ++i) {
    const auto pass = pretrain_forward(model, tubes[i], plans[i], empty, probe, {true, true});
    std::vector<dc::Index> rows(pass.split.masked_index.begin(), pass.split.masked_index.end());
    acc += objectives::disentanglement_probe(pass.z_geo, dc::gather_rows(pass.z_lat, rows));
  }
  return acc / static_cast<double>(tubes.size());
}

}  // namespace tubemae::pipeline
