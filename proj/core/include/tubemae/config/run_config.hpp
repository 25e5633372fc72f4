// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration file: INI-style sections [data] [model] [mask] [loss]
// [train] [eval] holding "key = value" lines. '#' or ';' starts a comment
// line. Unknown sections or keys are rejected with the line number.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tubemae/dataio/dataset.hpp"
#include "tubemae/pipeline/model.hpp"
#include "tubemae/pipeline/train.hpp"

namespace tubemae::config {

struct DataSection {
  int classes = 3;
  int videos_per_class = 20;
  int frames = 24;  // L
  int points = 256;  // N stored per frame
  int pretrain_points = 0;  // pre-training input points; 0 = all
  double train_ratio = 0.8;
  std::string domain = "A";
  double noise = 0.01;
  std::string manifest;  // existing dataset; empty = generate in memory
};

struct EvalSection {
  int probe_epochs = 300;
  double probe_lr = 1e-2;
  std::string finetune_optimizer = "adamw";
  double finetune_lr = 5e-4;
  double finetune_weight_decay = 1e-4;
  int finetune_epochs = 20;
  int finetune_batch_size = 4;
  int finetune_warmup_epochs = 2;
  double finetune_radius = 0.5;  // r_s at fine-tuning
  int finetune_points = 0;       // fine-tuning input points; 0 = all
  double fraction = 1.0;         // semi-supervised share of the training split
  double fewshot_lr = 5e-4;      // replaces finetune_lr for few-shot runs and fraction < 1
  int n_way = 5;
  int m_shot = 1;
  int segments_per_video = 3;
  int seg_videos = 24;
  int seg_epochs = 20;
};

struct RunConfig {
  DataSection data;
  pipeline::ModelConfig model;
  pipeline::PretrainConfig pretrain;
  pipeline::TrainConfig train;
  EvalSection eval;

  /// Cross-field checks; throws ConfigError.
  void validate() const;
  /// The fine-tuning TrainConfig assembled from [eval] and the run seed.
  /// `reduced_data` selects fewshot_lr.
  pipeline::TrainConfig finetune_train(bool reduced_data = false) const;
  /// Tube settings for fine-tuning: model.tubes with eval.finetune_radius.
  geometry::TubeConfig finetune_tubes() const;
  int resolved_pretrain_points() const { return data.pretrain_points > 0 ? data.pretrain_points : data.points; }
  int resolved_finetune_points() const { return eval.finetune_points > 0 ? eval.finetune_points : data.points; }
};

/// Synthetic dataset described by [data]; the split seed derives from `seed`.
dataio::DatasetSpec dataset_spec(const RunConfig& cfg, std::uint64_t seed);

struct Override {
  std::string key;  // "section.key"
  std::string value;
  std::string origin;  // e.g. "--epochs" or "--set"
};

RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Applies "section.key" = value; throws ConfigError on unknown keys.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// Every key with its resolved value, in canonical order. Parsing the result
/// reproduces `cfg` exactly.
std::string render_config(const RunConfig& cfg, const std::vector<Override>& overrides = {});

/// Hash of the rendered configuration (overrides excluded from the text).
std::uint64_t config_hash(const RunConfig& cfg);

/// "section.key" names in canonical order.
std::vector<std::string> config_keys();

}  // namespace tubemae::config
