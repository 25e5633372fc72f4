// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tubemae/diffcore/gradcheck.hpp"

namespace tubemae::pipeline {

/// Linear warmup from 0 to base_lr, then half-cosine decay to 0 at
/// total_steps.
struct Schedule {
  double base_lr = 3e-4;
  std::int64_t warmup_steps = 0;
  std::int64_t total_steps = 1;
};

double lr_at(std::int64_t step, const Schedule& schedule);

enum class OptimizerKind { kAdamW, kSgd };

OptimizerKind parse_optimizer(const std::string& name);
std::string to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdamW;
  double weight_decay = 5e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double momentum = 0.9;  // SGD only
};

/// Updates a fixed list of leaf tensors in place. Weight decay is decoupled:
/// p <- p * (1 - lr * wd) before the gradient step, for both kinds.
class Optimizer {
 public:
  Optimizer(std::vector<dc::NamedTensor> params, const OptimizerConfig& cfg);

  /// Applies one update with the current leaf gradients (missing = zero).
  void step(double lr);
  void zero_grad();

  std::int64_t steps() const { return steps_; }
  const OptimizerConfig& config() const { return cfg_; }
  const std::vector<dc::NamedTensor>& params() const { return params_; }

  /// First/second moment buffers (second is empty for SGD), one per param.
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  void restore(std::vector<std::vector<double>> m, std::vector<std::vector<double>> v, std::int64_t steps);

 private:
  std::vector<dc::NamedTensor> params_;
  OptimizerConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::int64_t steps_ = 0;
};

}  // namespace tubemae::pipeline
