// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/pipeline/optim.hpp"

#include <cmath>
#include <numbers>

#include "tubemae/common/error.hpp"

namespace tubemae::pipeline {

double lr_at(std::int64_t step, const Schedule& s) {
  TUBEMAE_EXPECT(step >= 0, "lr_at: negative step");
  TUBEMAE_EXPECT(s.base_lr > 0.0 && s.total_steps > 0 && s.warmup_steps >= 0 && s.warmup_steps < s.total_steps,
                 "lr_at: invalid schedule");
  if (step < s.warmup_steps) return s.base_lr * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  if (step >= s.total_steps) return 0.0;
  const double progress =
      static_cast<double>(step - s.warmup_steps) / static_cast<double>(s.total_steps - s.warmup_steps);
  return 0.5 * s.base_lr * (1.0 + std::cos(std::numbers::pi * progress));
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adamw") return OptimizerKind::kAdamW;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw ConfigError("unknown optimizer '" + name + "'");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::kAdamW ? "adamw" : "sgd"; }

Optimizer::Optimizer(std::vector<dc::NamedTensor> params, const OptimizerConfig& cfg)
    : params_(std::move(params)), cfg_(cfg) {
  for (const auto& p : params_) {
    TUBEMAE_EXPECT(p.tensor.defined() && p.tensor.node()->is_leaf(), "optimizer parameter '" + p.name + "' is not a leaf");
    m_.emplace_back(static_cast<std::size_t>(p.tensor.numel()), 0.0);
    if (cfg_.kind == OptimizerKind::kAdamW) v_.emplace_back(static_cast<std::size_t>(p.tensor.numel()), 0.0);
  }
}

void Optimizer::step(double lr) {
  ++steps_;
  const double decay = 1.0 - lr * cfg_.weight_decay;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& t = params_[i].tensor;
    auto data = t.mutable_data();
    const bool has_grad = t.has_grad();
    const auto grad = has_grad ? t.grad() : std::span<const double>();
    auto& m = m_[i];
    for (std::size_t k = 0; k < data.size(); ++k) {
      const double g = has_grad ? grad[k] : 0.0;
      data[k] *= decay;
      if (cfg_.kind == OptimizerKind::kAdamW) {
        auto& v = v_[i];
        m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g;
        v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g * g;
        data[k] -= lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + cfg_.eps);
      } else {
        m[k] = cfg_.momentum * m[k] + g;
        data[k] -= lr * m[k];
      }
    }
  }
}

void Optimizer::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

void Optimizer::restore(std::vector<std::vector<double>> m, std::vector<std::vector<double>> v, std::int64_t steps) {
  TUBEMAE_EXPECT(m.size() == m_.size() && v.size() == v_.size(), "optimizer state does not match parameters");
  for (std::size_t i = 0; i < m.size(); ++i) TUBEMAE_EXPECT(m[i].size() == m_[i].size(), "moment size mismatch");
  for (std::size_t i = 0; i < v.size(); ++i) TUBEMAE_EXPECT(v[i].size() == v_[i].size(), "moment size mismatch");
  m_ = std::move(m);
  v_ = std::move(v);
  steps_ = steps;
}

}  // namespace tubemae::pipeline
