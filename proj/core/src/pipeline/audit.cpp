// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/pipeline/audit.hpp"

#include <cmath>
#include <limits>

#include "tubemae/common/rng.hpp"
#include "tubemae/diffcore/ops.hpp"
#include "tubemae/objectives/losses.hpp"
#include "tubemae/pipeline/model.hpp"

namespace tubemae::pipeline {

namespace {

constexpr int kChannels = 16;

dc::Tensor random_tensor(dc::Shape shape, Rng& rng, bool grad) {
  dc::Index n = 1;
  for (auto d : shape) n *= d;
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = rng.normal();
  return dc::Tensor::from(std::move(shape), std::move(v), grad);
}

std::vector<double> unit_vector(Rng& rng) {
  std::vector<double> v(kChannels);
  double sq = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    sq += x * x;
  }
  for (auto& x : v) x /= std::sqrt(sq);
  return v;
}

geometry::PointCloudVideo random_video(int frames, int points, Rng& rng) {
  geometry::PointCloudVideo v;
  v.frames = frames;
  v.points = points;
  v.coords.resize(static_cast<std::size_t>(frames) * points * 3);
  for (auto& c : v.coords) c = static_cast<float>(rng.normal(0.0, 0.5));
  return v;
}

ObjectiveCheck check(const std::string& name, const std::function<dc::Tensor()>& fn,
                     std::vector<dc::NamedTensor> leaves, const dc::GradCheckOptions& options) {
  return {name, dc::check_gradients(fn, std::move(leaves), options)};
}

}  // namespace

dc::GradCheckOptions gradient_suite_options() {
  dc::GradCheckOptions o;
  o.magnitude_floor = 1e-5;
  return o;
}

std::vector<ObjectiveCheck> gradient_suite(std::uint64_t seed, const dc::GradCheckOptions& options) {
  std::vector<ObjectiveCheck> out;
  Rng rng = Rng::stream(seed, "grad-suite");
  auto heads = objectives::ProjectionHeads::init(kChannels, rng);
  std::vector<dc::NamedTensor> head_params;
  heads.collect(head_params, "heads.");
  const objectives::LossConfig loss_cfg;

  {
    const int frames = 2;
    auto rec = random_tensor({2, frames * 5 * 3}, rng, true);
    auto gt = random_tensor({2, frames * 6 * 3}, rng, true);
    out.push_back(check("chamfer", [&] { return objectives::chamfer_loss(rec, gt, frames); },
                        {{"rec", rec}, {"gt", gt}}, options));
  }
  {
    auto z_lat = random_tensor({4, kChannels}, rng, true);
    auto z = random_tensor({4, kChannels}, rng, false);
    std::vector<dc::NamedTensor> leaves = {{"z_lat", z_lat}};
    heads.latent.collect(leaves, "latent.");
    out.push_back(check("latent", [&] { return objectives::latent_loss(z_lat, z, heads); }, leaves, options));
  }
  {
    auto online_rows = random_tensor({3, kChannels}, rng, true);
    auto target_rows = random_tensor({4, kChannels}, rng, false);
    std::vector<dc::NamedTensor> leaves = {{"online", online_rows}};
    heads.motion_forward.collect(leaves, "motion_forward.");
    heads.motion_backward.collect(leaves, "motion_backward.");
    out.push_back(check(
        "motion",
        [&] {
          objectives::FrameFeatures online{online_rows, {0, 1, 3}, 4};
          objectives::FrameFeatures target{target_rows, {0, 1, 2, 3}, 4};
          return objectives::motion_loss(online, target, heads, loss_cfg);
        },
        leaves, options));
  }
  {
    auto q_hat = random_tensor({1, kChannels}, rng, true);
    const auto q_vec = unit_vector(rng);
    auto q = dc::Tensor::from({1, kChannels}, q_vec);
    objectives::NegativeQueue queue(8, kChannels);
    for (int i = 0; i < 8; ++i) queue.push(unit_vector(rng));
    std::vector<dc::NamedTensor> leaves = {{"q_hat", q_hat}};
    heads.global.collect(leaves, "global.");
    out.push_back(check("global", [&] { return objectives::global_loss(q_hat, q, queue, heads, loss_cfg); }, leaves,
                        options));
  }
  {
    ModelConfig cfg;
    cfg.encoder.channels = kChannels;
    cfg.encoder.depth = 1;
    cfg.encoder.heads = 2;
    cfg.encoder.mlp_ratio = 2;
    cfg.decoder.depth = 1;
    cfg.decoder.heads = 2;
    cfg.decoder.mlp_ratio = 2;
    cfg.tubes.radius = 0.8;
    cfg.tubes.tube_frames = 3;
    cfg.tubes.neighbors = 4;
    cfg.tubes.spatial_stride = 8;
    cfg.tubes.temporal_stride = 2;
    cfg.source_frames = 4;
    cfg.points = 16;
    auto model = Model::init(cfg, derive_seed(seed, "grad-suite-model"));
    const auto video = random_video(cfg.source_frames, cfg.points, rng);
    const auto tubes = geometry::build_tubes(video, cfg.tubes, derive_seed(seed, "grad-suite-tubes"));
    const auto plan = masking::make_mask(tubes.anchor_frames, tubes.anchors_per_frame, masking::MaskStrategy::kFrame,
                                         0.5, derive_seed(seed, "grad-suite-mask"));
    objectives::NegativeQueue queue(8, kChannels);
    for (int i = 0; i < 8; ++i) queue.push(unit_vector(rng));
    PretrainConfig pcfg;
    pcfg.mask.ratio = 0.5;
    out.push_back(check(
        "combined", [&] { return pretrain_forward(model, tubes, plan, queue, pcfg).combined.total; },
        model.trainable(), options));
  }
  return out;
}

double naive_chamfer(const std::vector<double>& a, const std::vector<double>& b) {
  const auto one_way = [](const std::vector<double>& from, const std::vector<double>& to) {
    double sum = 0.0;
    for (std::size_t i = 0; i < from.size(); i += 3) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < to.size(); j += 3) {
        const double dx = from[i] - to[j];
        const double dy = from[i + 1] - to[j + 1];
        const double dz = from[i + 2] - to[j + 2];
        best = std::min(best, dx * dx + dy * dy + dz * dz);
      }
      sum += best;
    }
    return sum / static_cast<double>(from.size() / 3);
  };
  return one_way(a, b) + one_way(b, a);
}

ChamferAudit chamfer_audit(std::uint64_t seed, int pairs, int max_points) {
  ChamferAudit audit;
  Rng rng = Rng::stream(seed, "chamfer-audit");
  dc::NoGradGuard guard;
  for (int p = 0; p < pairs; ++p) {
    const int na = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_points)));
    const int nb = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_points)));
    std::vector<double> a(static_cast<std::size_t>(na) * 3), b(static_cast<std::size_t>(nb) * 3);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal();
    const auto ta = dc::Tensor::from({1, na * 3}, a);
    const auto tb = dc::Tensor::from({1, nb * 3}, b);
    const double ab = objectives::chamfer_loss(ta, tb, 1).item();
    const double ba = objectives::chamfer_loss(tb, ta, 1).item();
    audit.max_abs_error = std::max(audit.max_abs_error, std::abs(ab - naive_chamfer(a, b)));
    if (ab != ba) audit.symmetric = false;
    if (objectives::chamfer_loss(ta, ta, 1).item() != 0.0) audit.zero_on_identity = false;
    ++audit.pairs;
  }
  return audit;
}

}  // namespace tubemae::pipeline
