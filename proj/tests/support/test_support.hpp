// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small builders shared by the unit tests.

#pragma once

#include <cstdint>
#include <vector>

#include "tubemae/common/rng.hpp"
#include "tubemae/diffcore/tensor.hpp"
#include "tubemae/geometry/video.hpp"
#include "tubemae/pipeline/model.hpp"

namespace testing_support {

/// Uniform points in [-extent, extent]^3, fresh per frame.
inline tubemae::geometry::PointCloudVideo random_video(int frames, int points, std::uint64_t seed,
                                                       double extent = 1.0) {
  tubemae::Rng rng(seed);
  tubemae::geometry::PointCloudVideo v;
  v.frames = frames;
  v.points = points;
  v.coords.resize(static_cast<std::size_t>(frames) * points * 3);
  for (auto& c : v.coords) c = static_cast<float>(rng.uniform(-extent, extent));
  return v;
}

inline tubemae::dc::Tensor random_tensor(tubemae::dc::Shape shape, std::uint64_t seed, bool grad = false,
                                         double scale = 1.0) {
  tubemae::Rng rng(seed);
  std::vector<double> values(static_cast<std::size_t>(tubemae::dc::numel_of(shape)));
  for (auto& x : values) x = rng.normal(0.0, scale);
  return tubemae::dc::Tensor::from(std::move(shape), std::move(values), grad);
}

inline std::vector<double> values(const tubemae::dc::Tensor& t) { return {t.data().begin(), t.data().end()}; }

/// A model small enough to step hundreds of times inside a unit test.
inline tubemae::pipeline::ModelConfig tiny_model_config() {
  tubemae::pipeline::ModelConfig cfg;
  cfg.encoder.channels = 16;
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
  return cfg;
}

}  // namespace testing_support
