// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

// Micro benchmarks for the hot paths of one pre-training step.

#include <benchmark/benchmark.h>

#include "tubemae/config/run_config.hpp"
#include "tubemae/dataio/synthetic.hpp"
#include "tubemae/geometry/sampling.hpp"
#include "tubemae/geometry/tubes.hpp"
#include "tubemae/masking/mask.hpp"
#include "tubemae/objectives/losses.hpp"
#include "tubemae/pipeline/model.hpp"
#include "tubemae/pipeline/train.hpp"

namespace {

using namespace tubemae;

config::RunConfig desk_config(int points) {
  config::RunConfig cfg;
  cfg.data.points = points;
  return cfg;
}

geometry::PointCloudVideo sample_video(const config::RunConfig& cfg) {
  const auto spec = config::dataset_spec(cfg, 1);
  return dataio::generate_video(spec.classes[0], cfg.data.frames, cfg.data.points, 7);
}

void BM_FarthestPointSample(benchmark::State& state) {
  const auto cfg = desk_config(static_cast<int>(state.range(0)));
  const auto video = sample_video(cfg);
  const auto frame = video.frame(0);
  const int count = cfg.data.points / cfg.model.tubes.spatial_stride;
  for (auto _ : state) benchmark::DoNotOptimize(geometry::farthest_point_sample_from(frame, count, 0));
}
BENCHMARK(BM_FarthestPointSample)->Arg(256)->Arg(1024)->Arg(4096);

void BM_BuildTubes(benchmark::State& state) {
  const auto cfg = desk_config(static_cast<int>(state.range(0)));
  const auto video = sample_video(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(geometry::build_tubes(video, cfg.model.tubes, 3));
}
BENCHMARK(BM_BuildTubes)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ChamferForwardBackward(benchmark::State& state) {
  const dc::Index sets = state.range(0);
  const dc::Index width = 3 * 32 * 3;  // frames x neighbours x xyz
  Rng rng(5);
  const auto random = [&](bool grad) {
    std::vector<double> v(static_cast<std::size_t>(sets * width));
    for (auto& x : v) x = rng.normal();
    return dc::Tensor::from({sets, width}, std::move(v), grad);
  };
  auto rec = random(true);
  const auto gt = random(false);
  for (auto _ : state) {
    rec.zero_grad();
    auto loss = objectives::chamfer_loss(rec, gt, 3);
    dc::backward(loss);
    benchmark::DoNotOptimize(loss.item());
  }
}
BENCHMARK(BM_ChamferForwardBackward)->Arg(16)->Arg(72)->Unit(benchmark::kMillisecond);

void BM_EncoderForward(benchmark::State& state) {
  const auto cfg = desk_config(256);
  const auto video = sample_video(cfg);
  auto model = pipeline::Model::init(cfg.model, 1);
  const auto tubes = geometry::build_tubes(video, cfg.model.tubes, 3);
  dc::NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(pipeline::encode_video(model.encoders.online, tubes));
}
BENCHMARK(BM_EncoderForward)->Unit(benchmark::kMillisecond);

void BM_PretrainStep(benchmark::State& state) {
  auto cfg = desk_config(256);
  cfg.train.batch_size = 1;
  const std::vector<geometry::PointCloudVideo> videos{sample_video(cfg)};
  auto model = pipeline::Model::init(cfg.model, 1);
  pipeline::Pretrainer trainer(model, cfg.pretrain, cfg.train, videos.size());
  for (auto _ : state) benchmark::DoNotOptimize(trainer.run_epoch(videos).loss.total);
}
BENCHMARK(BM_PretrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
