// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "run_context.hpp"

namespace tubemae::cli {

/// Where an encoder comes from: a checkpoint, or fresh weights.
struct EncoderSource {
  std::string checkpoint;
  bool random_init = false;
};

struct PretrainOptions {
  std::string resume;
  int save_every = 0;  // epochs between intermediate checkpoints; 0 = final only
};

struct AttentionOptions {
  std::string checkpoint;
  int video = 0;
  std::optional<int> layer;  // default: last encoder layer
};

// Each returns the process exit status.
int run_gen_data(const CommonOptions& common);
int run_pretrain(const CommonOptions& common, const PretrainOptions& options);
int run_probe(const CommonOptions& common, const EncoderSource& source);
int run_finetune(const CommonOptions& common, const EncoderSource& source, std::optional<double> fraction);
int run_fewshot(const CommonOptions& common, const EncoderSource& source, std::optional<int> n_way,
                std::optional<int> m_shot);
int run_eval_seg(const CommonOptions& common, const EncoderSource& source);
int run_export_attn(const CommonOptions& common, const AttentionOptions& options);
int run_grad_check(const CommonOptions& common, double rtol);
int run_chamfer_oracle(const CommonOptions& common, int pairs, double tolerance);

}  // namespace tubemae::cli
