// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tubemae/geometry/video.hpp"
#include "tubemae/pipeline/model.hpp"
#include "tubemae/pipeline/optim.hpp"

namespace tubemae::pipeline {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 4;
  double base_lr = 3e-4;
  double weight_decay = 5e-2;
  int warmup_epochs = 2;
  OptimizerKind optimizer = OptimizerKind::kAdamW;
  double sgd_momentum = 0.9;
  double scale_lo = 1.0;  // random isotropic scaling per video and epoch
  double scale_hi = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  OptimizerConfig optimizer_config() const;
  Schedule schedule(std::size_t dataset_size) const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  objectives::LossReport loss;  // mean over the epoch's videos
  double lr = 0.0;              // rate used by the epoch's last step
};

/// Stateful pre-training driver: owns the optimizer and the negative queue.
class Pretrainer {
 public:
  Pretrainer(Model& model, const PretrainConfig& pretrain, const TrainConfig& train, std::size_t dataset_size);

  EpochRecord run_epoch(const std::vector<geometry::PointCloudVideo>& videos, const StepHook& hook = {});

  Optimizer& optimizer() { return *optimizer_; }
  objectives::NegativeQueue& queue() { return *queue_; }
  std::int64_t step() const { return step_; }
  int epoch() const { return epoch_; }
  void set_progress(std::int64_t step, int epoch) {
    step_ = step;
    epoch_ = epoch;
  }

 private:
  Model& model_;
  PretrainConfig pretrain_;
  TrainConfig train_;
  Schedule schedule_;
  std::unique_ptr<Optimizer> optimizer_;
  std::unique_ptr<objectives::NegativeQueue> queue_;
  std::int64_t step_ = 0;
  int epoch_ = 0;
};

/// Tubes for one video under a named seed stream; `a`/`b` index the draw.
geometry::TubeBatch tubes_for(const geometry::PointCloudVideo& video, const geometry::TubeConfig& cfg,
                              std::uint64_t seed, const char* stream, std::uint64_t a, std::uint64_t b);

std::vector<EpochRecord> pretrain(Model& model, const std::vector<geometry::PointCloudVideo>& videos,
                                  const PretrainConfig& pretrain, const TrainConfig& train,
                                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Softmax regression trained by full-batch AdamW on fixed features.
struct ProbeConfig {
  int epochs = 300;
  double lr = 1e-2;
  double weight_decay = 1e-4;
  bool standardize = true;  // affine feature scaling from training statistics
  std::uint64_t seed = 0;
};

struct ProbeResult {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::vector<int> test_predictions;
};

/// Pure classifier fit on feature rows; labels in [0, classes).
ProbeResult fit_linear_classifier(const std::vector<std::vector<double>>& train_x, const std::vector<int>& train_y,
                                  const std::vector<std::vector<double>>& test_x, const std::vector<int>& test_y,
                                  int classes, const ProbeConfig& cfg);

/// Frozen encoder: max-pooled features, then a linear classifier.
ProbeResult linear_probe(const backbone::Encoder& encoder, const geometry::TubeConfig& tubes,
                         const std::vector<geometry::PointCloudVideo>& train,
                         const std::vector<geometry::PointCloudVideo>& test, const ProbeConfig& cfg);

/// Per-class seeded draw of round(fraction * n_c) videos (at least one).
std::vector<std::size_t> stratified_fraction(const std::vector<int>& labels, double fraction, std::uint64_t seed);

struct FinetuneConfig {
  TrainConfig train{.epochs = 20, .batch_size = 4, .base_lr = 5e-4, .weight_decay = 1e-4, .warmup_epochs = 2};
  double fraction = 1.0;
};

struct FinetuneRecord {
  int epoch = 0;
  double loss = 0.0;
  double test_accuracy = 0.0;
  double lr = 0.0;
};

struct FinetuneResult {
  std::vector<FinetuneRecord> history;
  std::size_t train_videos = 0;
  double final_accuracy = 0.0;
};

/// End-to-end training of a copy of `init` plus a max-pool linear classifier.
FinetuneResult finetune(const backbone::Encoder& init, const geometry::TubeConfig& tubes,
                        const std::vector<geometry::PointCloudVideo>& train,
                        const std::vector<geometry::PointCloudVideo>& test, const FinetuneConfig& cfg,
                        const std::function<void(const FinetuneRecord&)>& on_epoch = {});

struct FewShotSplit {
  std::vector<int> classes;  // sampled class ids, ascending
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};

FewShotSplit fewshot_split(const std::vector<int>& labels, int n_way, int m_shot, std::uint64_t seed);

struct SegmentationResult {
  std::vector<FinetuneRecord> history;
  std::vector<std::vector<int>> predictions;  // per test video, one label per anchor frame
  std::vector<std::vector<int>> targets;
};

/// Per-frame labels at anchor frames: frame_labels[j * temporal_stride].
std::vector<int> anchor_frame_labels(const geometry::PointCloudVideo& video, const geometry::TubeConfig& tubes);

/// Per-frame spatial max-pool features and a linear classifier per frame,
/// trained end to end with per-frame cross-entropy.
SegmentationResult segmentation_head_finetune(const backbone::Encoder& init, const geometry::TubeConfig& tubes,
                                              const std::vector<geometry::PointCloudVideo>& train,
                                              const std::vector<geometry::PointCloudVideo>& test,
                                              const TrainConfig& cfg, int classes);

}  // namespace tubemae::pipeline
